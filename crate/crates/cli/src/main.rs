//! `fakeaudit`: run the audit, training and evaluation pipeline stage by
//! stage. Every stage reads its inputs from and writes its outputs to the
//! output directory, so any stage can be rerun on its own.

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fakeaudit::llmgen::GenError;

use crate::config::RunConfig;
use crate::output::Ctx;

/// Bad input or configuration; exits with status 1.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

#[derive(Parser)]
#[command(name = "fakeaudit", version, about = "Audit and debias fake-news detectors")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every randomized step (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Merge and validate corpora, then split into train and test.
    Ingest {
        /// Corpus files (override `corpus.paths`).
        #[arg(long = "corpus")]
        corpus: Vec<PathBuf>,
    },
    /// Build the augmented training split from machine-paraphrased real news.
    Augment {
        /// Extra MR corpora (override `augment.paths`).
        #[arg(long = "corpus")]
        corpus: Vec<PathBuf>,
    },
    /// Compute the content-feature matrix.
    Extract {
        /// Extract this corpus instead of the ingested one.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Pairwise subgroup tests and debiased feature lists.
    Audit,
    /// Train baseline, debiased and (if available) augmented detectors.
    Train,
    /// Score every trained detector on the test split.
    Eval,
    /// Before/after differences between evaluation reports.
    Compare {
        #[arg(long, requires = "after")]
        before: Option<PathBuf>,
        #[arg(long, requires = "before")]
        after: Option<PathBuf>,
    },
    /// Generate machine-written articles through a chat-completion endpoint.
    Generate {
        /// Apply an edited review sheet to the saved records instead of
        /// calling the endpoint.
        #[arg(long)]
        review: Option<PathBuf>,
    },
    /// Distribution similarity between two embedding sets.
    Mauve {
        #[arg(long)]
        p: Option<PathBuf>,
        #[arg(long)]
        q: Option<PathBuf>,
    },
    /// Inter-rater agreement between two annotation files.
    Kappa {
        #[arg(long)]
        a: Option<PathBuf>,
        #[arg(long)]
        b: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest { .. } => "ingest",
            Command::Augment { .. } => "augment",
            Command::Extract { .. } => "extract",
            Command::Audit => "audit",
            Command::Train => "train",
            Command::Eval => "eval",
            Command::Compare { .. } => "compare",
            Command::Generate { .. } => "generate",
            Command::Mauve { .. } => "mauve",
            Command::Kappa { .. } => "kappa",
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.chain().any(|c| c.is::<Invalid>()) {
        return 1;
    }
    let runtime = e.chain().any(|c| {
        c.is::<std::io::Error>()
            || matches!(
                c.downcast_ref::<GenError>(),
                Some(GenError::RetriesExhausted { .. } | GenError::Http { .. } | GenError::BadResponse(_) | GenError::Io { .. })
            )
    });
    if runtime {
        2
    } else {
        1
    }
}

fn setup(cli: &Cli) -> anyhow::Result<Ctx> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    // input overrides become part of the effective config, and so of its hash
    match &cli.command {
        Command::Ingest { corpus } if !corpus.is_empty() => cfg.corpus.paths = corpus.clone(),
        Command::Augment { corpus } if !corpus.is_empty() => cfg.augment.paths = corpus.clone(),
        Command::Mauve { p, q } => {
            cfg.mauve.p = p.clone().or(cfg.mauve.p.take());
            cfg.mauve.q = q.clone().or(cfg.mauve.q.take());
        }
        Command::Kappa { a, b } => {
            cfg.kappa.a = a.clone().or(cfg.kappa.a.take());
            cfg.kappa.b = b.clone().or(cfg.kappa.b.take());
        }
        _ => {}
    }
    cfg.finalize()?;
    Ctx::new(cfg)
}

fn run(cli: &Cli, ctx: &Ctx) -> anyhow::Result<()> {
    match &cli.command {
        Command::Ingest { .. } => commands::ingest(ctx),
        Command::Augment { .. } => commands::augment(ctx),
        Command::Extract { corpus } => commands::extract(ctx, corpus.as_deref()),
        Command::Audit => commands::audit(ctx),
        Command::Train => commands::train(ctx),
        Command::Eval => commands::eval(ctx),
        Command::Compare { before, after } => commands::compare(ctx, before.as_deref().zip(after.as_deref())),
        Command::Generate { review } => commands::generate(ctx, review.as_deref()),
        Command::Mauve { .. } => commands::mauve(ctx),
        Command::Kappa { .. } => commands::kappa(ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let ctx = match setup(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let result = run(&cli, &ctx);
    let status = match &result {
        Ok(()) => "ok".to_string(),
        Err(e) => format!("error: {e:#}"),
    };
    if let Err(e) = ctx.log_run(cli.command.name(), &status) {
        log::warn!("cannot append to run log: {e}");
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
