//! One function per subcommand.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use fakeaudit::corpus::{self, load_corpus, split, write_corpus_with, Article, Corpus, Source, Subgroup};
use fakeaudit::eval::{
    aggregate_reports, diff_reports, evaluate, interpret_kappa, read_annotations, render_table,
    semantic_consistency, write_predictions, EvalReport, Prediction,
};
use fakeaudit::llmgen::{
    apply_review, assemble_machine_corpus, generate_batch, lint_template, read_records, write_records,
    write_review, GenError, LlmClient, PromptKind, SystemClock, TemplateSet, UreqTransport,
};
use fakeaudit::mauve::{mauve_score, EmbeddingSet};
use fakeaudit::models::{design_matrix, ModelDocument, ModelKind, TrainedModel};
use fakeaudit::stats::{select_debiased_features, significance_table, DebiasRule};
use fakeaudit::textfeat::{FeatureMatrix, LexiconSet};
use serde::Serialize;

use crate::config::require_file;
use crate::output::{read_json, read_list, Ctx, ALL, AUGMENT_EXTRA, FEATURES, TEST, TRAIN, TRAIN_AUGMENTED};
use crate::Invalid;

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

/// Loads a corpus file, treating malformed content as a validation error.
fn load(path: &Path, name: &str) -> anyhow::Result<Corpus> {
    require_file(path, "corpus")?;
    load_corpus(path, name).map_err(|e| match e {
        corpus::CorpusError::Io { .. } => anyhow::Error::new(e),
        other => invalid(format!("{}: {other}", path.display())),
    })
}

fn load_matrix(path: &Path) -> anyhow::Result<FeatureMatrix> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    FeatureMatrix::read_csv(BufReader::new(f)).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn ids(c: &Corpus, keep: impl Fn(&Article) -> bool) -> HashSet<&str> {
    c.articles().iter().filter(|a| keep(a)).map(|a| a.id.as_str()).collect()
}

/// Rows of `m` for `wanted`, failing if any article has no feature row.
fn rows_for(m: &FeatureMatrix, wanted: &HashSet<&str>, what: &str) -> anyhow::Result<FeatureMatrix> {
    let sub = m.filter_ids(wanted);
    if sub.len() != wanted.len() {
        bail!(Invalid(format!(
            "feature matrix lacks {} of the {what} articles (rerun `extract`)",
            wanted.len() - sub.len()
        )));
    }
    Ok(sub)
}

#[derive(Serialize)]
struct IngestSummary {
    corpus: String,
    all: BTreeMap<Subgroup, usize>,
    train: BTreeMap<Subgroup, usize>,
    test: BTreeMap<Subgroup, usize>,
}

pub fn ingest(ctx: &Ctx) -> anyhow::Result<()> {
    let paths = &ctx.cfg.corpus.paths;
    if paths.is_empty() {
        bail!(Invalid("no corpus given (set corpus.paths or pass --corpus)".into()));
    }
    let name = &ctx.cfg.corpus.name;
    let mut merged = Corpus::empty(name.as_str());
    for p in paths {
        let c = load(p, name)?;
        merged = corpus::augment(&merged, &c).map_err(|e| invalid(format!("{}: {e}", p.display())))?;
    }
    let merged = merged.renamed(name.as_str());
    let (train, test) = split(&merged, &ctx.cfg.split_spec()).map_err(|e| invalid(e.to_string()))?;
    let prov = Some(ctx.provenance.as_str());
    write_corpus_with(&merged, ctx.output(ALL)?, prov)?;
    write_corpus_with(&train, ctx.output(TRAIN)?, prov)?;
    write_corpus_with(&test, ctx.output(TEST)?, prov)?;
    let summary = IngestSummary {
        corpus: name.clone(),
        all: merged.subgroup_counts().as_map(),
        train: train.subgroup_counts().as_map(),
        test: test.subgroup_counts().as_map(),
    };
    ctx.write_json("corpus/summary.json", &summary)?;
    let c = merged.subgroup_counts();
    println!(
        "{}: {} articles (HR {}, HF {}, MF {}, MR {}); train {}, test {}",
        name,
        c.total(),
        c.hr,
        c.hf,
        c.mf,
        c.mr,
        train.len(),
        test.len()
    );
    Ok(())
}

pub fn augment(ctx: &Ctx) -> anyhow::Result<()> {
    let name = &ctx.cfg.corpus.name;
    let all = load(&ctx.input(ALL, "ingest")?, name)?;
    let train = load(&ctx.input(TRAIN, "ingest")?, name)?;
    let test = load(&ctx.input(TEST, "ingest")?, name)?;
    let paths = &ctx.cfg.augment.paths;

    let mut extra = Vec::new();
    for p in paths {
        let c = load(p, name)?;
        if let Some(a) = c.articles().iter().find(|a| a.subgroup() != Subgroup::MR) {
            bail!(Invalid(format!("{}: {} is {}, augmentation takes MR articles only", p.display(), a.id, a.subgroup())));
        }
        c.check_origins(&all).map_err(|e| invalid(format!("{}: {e}", p.display())))?;
        extra.extend(c.into_articles());
    }

    // a paraphrase of a test article would leak it into training
    let test_ids = ids(&test, |_| true);
    let leaks = |a: &Article| a.origin_id.as_deref().is_some_and(|o| test_ids.contains(o));
    let mut dropped = 0;
    let mut keep_mr = |a: &Article| {
        let ok = !leaks(a);
        dropped += usize::from(!ok);
        ok
    };
    let mut articles: Vec<Article> = Vec::new();
    let mut n_mr = 0;
    for a in train.articles() {
        if a.subgroup() != Subgroup::MR || keep_mr(a) {
            n_mr += usize::from(a.subgroup() == Subgroup::MR);
            articles.push(a.clone());
        }
    }
    let extra: Vec<Article> = extra.into_iter().filter(|a| keep_mr(a)).collect();
    n_mr += extra.len();
    if n_mr == 0 {
        bail!(Invalid("no machine-paraphrased real (MR) articles available for augmentation".into()));
    }
    let extra = Corpus::new(format!("{name}-extra"), extra).map_err(|e| invalid(e.to_string()))?;
    let augmented = corpus::augment(&Corpus::new(name.as_str(), articles)?, &extra)
        .map_err(|e| invalid(e.to_string()))?;
    // extra articles must not collide with the ingested corpus either
    corpus::augment(&all, &extra).map_err(|e| invalid(e.to_string()))?;

    let prov = Some(ctx.provenance.as_str());
    write_corpus_with(&augmented, ctx.output(TRAIN_AUGMENTED)?, prov)?;
    write_corpus_with(&extra, ctx.output(AUGMENT_EXTRA)?, prov)?;
    println!(
        "augmented training split: {} articles including {n_mr} MR ({} from extra corpora); {dropped} dropped as paraphrases of test articles",
        augmented.len(),
        extra.len()
    );
    Ok(())
}

fn lexicons(ctx: &Ctx) -> anyhow::Result<LexiconSet> {
    match &ctx.cfg.lexicon_dir {
        Some(dir) => {
            if !dir.is_dir() {
                bail!(Invalid(format!("lexicon directory not found: {}", dir.display())));
            }
            LexiconSet::builtin_with_overrides(dir).map_err(|e| invalid(e.to_string()))
        }
        None => Ok(LexiconSet::builtin()),
    }
}

pub fn extract(ctx: &Ctx, corpus_path: Option<&Path>) -> anyhow::Result<()> {
    let name = &ctx.cfg.corpus.name;
    let lex = lexicons(ctx)?;
    let corpus = match corpus_path {
        Some(p) => load(p, name)?,
        None => {
            let all = load(&ctx.input(ALL, "ingest")?, name)?;
            let extra = ctx.path(AUGMENT_EXTRA);
            if extra.exists() {
                corpus::augment(&all, &load(&extra, name)?).map_err(|e| invalid(e.to_string()))?
            } else {
                all
            }
        }
    };
    let m = FeatureMatrix::from_corpus(&corpus, &lex).map_err(|e| invalid(e.to_string()))?;
    let prov = ctx.provenance.clone();
    ctx.output(FEATURES)?;
    let path = ctx.path(FEATURES);
    let f = File::create(&path).with_context(|| format!("writing {}", path.display()))?;
    m.write_csv(std::io::BufWriter::new(f), Some(&prov))?;
    println!("{} rows x {} features -> {}", m.len(), m.names.len(), path.display());
    Ok(())
}

/// Training rows of the unaugmented detectors: HR, HF and MF.
fn base_subgroup(a: &Article) -> bool {
    a.subgroup() != Subgroup::MR
}

pub fn audit(ctx: &Ctx) -> anyhow::Result<()> {
    let name = &ctx.cfg.corpus.name;
    let m = load_matrix(&ctx.input(FEATURES, "extract")?)?;
    let train = load(&ctx.input(TRAIN, "ingest")?, name)?;
    let rows = rows_for(&m, &ids(&train, base_subgroup), "training")?;
    let table = significance_table(&rows, &ctx.cfg.audit.thresholds).map_err(|e| invalid(e.to_string()))?;
    let prov = ctx.provenance.clone();
    ctx.write_with("audit/significance.csv", |buf| Ok(table.write_csv(buf, None)?))?;
    ctx.write_text("audit/significance.txt", &table.render_text())?;
    for rule in [DebiasRule::A, DebiasRule::B] {
        let rel = format!("audit/rule_{}.txt", rule.to_string().to_lowercase());
        match select_debiased_features(&table, rule) {
            Ok(sel) => {
                ctx.write_text(&rel, &(sel.join("\n") + "\n"))?;
                println!("rule {rule}: {} of {} features kept", sel.len(), m.names.len());
            }
            Err(e) => {
                // an empty list is a legitimate outcome; train reports it
                ctx.write_text(&rel, "")?;
                log::warn!("{e}");
                println!("rule {rule}: no features kept");
            }
        }
    }
    log::debug!("audit written with provenance {prov}");
    Ok(())
}

fn fit_and_save(
    ctx: &Ctx,
    kind: ModelKind,
    variant: &str,
    rows: &FeatureMatrix,
    names: &[String],
) -> anyhow::Result<()> {
    let (x, y) = design_matrix(rows, names).map_err(|e| invalid(e.to_string()))?;
    let model = TrainedModel::fit(kind, &x, &y, names, &ctx.cfg.models.fit)
        .map_err(|e| invalid(format!("{kind:?} {variant}: {e}")))?;
    let mut doc = ModelDocument::new(model, ctx.cfg.models.fit.clone());
    doc.provenance = Some(ctx.provenance.clone());
    let rel = format!("models/{}-{variant}.json", kind_name(kind));
    doc.save(ctx.output(&rel)?)?;
    println!("{rel}: {} rows, {} features", x.len(), names.len());
    Ok(())
}

fn kind_name(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::Logreg => "logreg",
        ModelKind::Tree => "tree",
    }
}

pub fn train(ctx: &Ctx) -> anyhow::Result<()> {
    let name = &ctx.cfg.corpus.name;
    let m = load_matrix(&ctx.input(FEATURES, "extract")?)?;
    let train = load(&ctx.input(TRAIN, "ingest")?, name)?;
    let rule = ctx.cfg.audit.rule;
    let rule_file = ctx.input(&format!("audit/rule_{}.txt", rule.to_string().to_lowercase()), "audit")?;
    let selected = read_list(&rule_file)?;
    if selected.is_empty() {
        bail!(Invalid(format!("rule {rule} kept no features; the debiased detector cannot be trained")));
    }
    let base = rows_for(&m, &ids(&train, base_subgroup), "training")?;
    let aug_path = ctx.path(TRAIN_AUGMENTED);
    let augmented = if aug_path.exists() {
        let c = load(&aug_path, name)?;
        Some(rows_for(&m, &ids(&c, |_| true), "augmented training")?)
    } else {
        None
    };
    ctx.fresh_dir("models")?;
    for &kind in &ctx.cfg.models.kinds {
        fit_and_save(ctx, kind, "baseline", &base, &m.names)?;
        fit_and_save(ctx, kind, "debiased", &base, &selected)?;
        if let Some(rows) = &augmented {
            fit_and_save(ctx, kind, "augmented", rows, &m.names)?;
        }
    }
    Ok(())
}

fn json_files(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    out.sort();
    Ok(out)
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn eval(ctx: &Ctx) -> anyhow::Result<()> {
    let name = &ctx.cfg.corpus.name;
    let m = load_matrix(&ctx.input(FEATURES, "extract")?)?;
    let test = load(&ctx.input(TEST, "ingest")?, name)?;
    let rows = rows_for(&m, &ids(&test, |_| true), "test")?;
    let models = json_files(&ctx.input("models", "train")?)?;
    if models.is_empty() {
        bail!(Invalid("no trained models (run `train` first)".into()));
    }
    ctx.fresh_dir("predictions")?;
    ctx.fresh_dir("reports")?;
    let threshold = ctx.cfg.eval.threshold;
    let mut table = Vec::new();
    for path in models {
        let doc = ModelDocument::load(&path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let scores = doc.model.predict_matrix(&rows).map_err(|e| invalid(e.to_string()))?;
        let preds: Vec<Prediction> = rows
            .rows
            .iter()
            .zip(scores)
            .map(|(r, s)| Prediction::from_score(r.article_id.clone(), s, threshold))
            .collect();
        let mut report = evaluate(&preds, &test, threshold).map_err(|e| invalid(e.to_string()))?;
        report.seed = Some(ctx.cfg.seed);
        report.split = Some("test".into());
        let s = stem(&path);
        ctx.write_with(&format!("predictions/{s}.jsonl"), |buf| Ok(write_predictions(buf, &preds)?))?;
        ctx.write_json(&format!("reports/{s}.json"), &report)?;
        table.push((s, aggregate_reports(std::slice::from_ref(&report))?));
    }
    let text = render_table(&table);
    ctx.write_text("reports/summary.txt", &text)?;
    print!("{text}");
    Ok(())
}

fn diff_pair(ctx: &Ctx, before: &Path, after: &Path, label: &str) -> anyhow::Result<()> {
    let b: EvalReport = read_json(before)?;
    let a: EvalReport = read_json(after)?;
    let d = diff_reports(&b, &a).map_err(|e| invalid(e.to_string()))?;
    ctx.write_with(&format!("compare/{label}.csv"), |buf| Ok(d.write_csv(buf, None)?))?;
    let text = d.render_text();
    ctx.write_text(&format!("compare/{label}.txt"), &text)?;
    println!("{label}\n{text}");
    Ok(())
}

pub fn compare(ctx: &Ctx, explicit: Option<(&Path, &Path)>) -> anyhow::Result<()> {
    if let Some((before, after)) = explicit {
        require_file(before, "report")?;
        require_file(after, "report")?;
        return diff_pair(ctx, before, after, &format!("{}-vs-{}", stem(before), stem(after)));
    }
    let reports = ctx.input("reports", "eval")?;
    let mut done = 0;
    for &kind in &ctx.cfg.models.kinds {
        let k = kind_name(kind);
        let base = reports.join(format!("{k}-baseline.json"));
        if !base.exists() {
            continue;
        }
        for variant in ["debiased", "augmented"] {
            let other = reports.join(format!("{k}-{variant}.json"));
            if other.exists() {
                diff_pair(ctx, &base, &other, &format!("{k}-{variant}"))?;
                done += 1;
            }
        }
    }
    if done == 0 {
        bail!(Invalid("no baseline/variant report pairs found (run `eval` first)".into()));
    }
    Ok(())
}

fn seed_corpus(ctx: &Ctx) -> anyhow::Result<Corpus> {
    let name = &ctx.cfg.corpus.name;
    let all = ctx.path(ALL);
    if all.exists() {
        return load(&all, name);
    }
    if ctx.cfg.corpus.paths.is_empty() {
        bail!(Invalid("no seed corpus: run `ingest` or set corpus.paths".into()));
    }
    let mut merged = Corpus::empty(name.as_str());
    for p in &ctx.cfg.corpus.paths {
        merged = corpus::augment(&merged, &load(p, name)?).map_err(|e| invalid(e.to_string()))?;
    }
    Ok(merged)
}

#[derive(Serialize)]
struct ExclusionRow<'a> {
    origin_id: &'a str,
    reason: &'a str,
}

pub fn generate(ctx: &Ctx, review: Option<&Path>) -> anyhow::Result<()> {
    let g = &ctx.cfg.generate;
    let seeds = seed_corpus(ctx)?;
    let mut failures: Vec<(String, String)> = Vec::new();
    let records = match review {
        Some(sheet) => {
            require_file(sheet, "review sheet")?;
            let recs_path = ctx.input("generate/records.jsonl", "generate")?;
            let f = File::open(&recs_path).with_context(|| format!("opening {}", recs_path.display()))?;
            let mut records = read_records(BufReader::new(f)).map_err(|e| invalid(e.to_string()))?;
            let f = File::open(sheet).with_context(|| format!("opening {}", sheet.display()))?;
            let changed = apply_review(&mut records, f).map_err(|e| invalid(format!("{}: {e}", sheet.display())))?;
            println!("review changed {changed} decision(s)");
            records
        }
        None => {
            let templates = match &g.templates_dir {
                Some(dir) => TemplateSet::load_dir(dir).map_err(|e| invalid(e.to_string()))?,
                None => TemplateSet::builtin(),
            };
            for t in templates.all() {
                for finding in lint_template(t) {
                    log::warn!("template lint: {finding}");
                }
            }
            let wanted = (Source::Human, g.kind.target_label());
            let mut pool: Vec<&Article> =
                seeds.articles().iter().filter(|a| (a.source, a.label) == wanted).collect();
            pool.sort_by(|a, b| a.id.cmp(&b.id));
            if let Some(limit) = g.limit {
                pool.truncate(limit);
            }
            if pool.is_empty() {
                bail!(Invalid(format!("no human-written {:?} seed articles", g.kind.target_label())));
            }
            let client = LlmClient::new(ctx.cfg.llm.clone(), UreqTransport::new(), SystemClock::new())
                .map_err(|e| match e {
                    GenError::MissingApiKey(_) | GenError::Config(_) => invalid(e.to_string()),
                    other => other.into(),
                })?;
            let results = generate_batch(g.kind, &pool, &templates, &client).map_err(|e| match e {
                GenError::Auth { .. } => invalid(e.to_string()),
                other => anyhow::Error::new(other),
            })?;
            let mut records = Vec::new();
            let mut first_error = None;
            for (id, r) in results {
                match r {
                    Ok(rec) => records.push(rec),
                    Err(e) => {
                        log::warn!("{id}: {e}");
                        failures.push((id.clone(), e.to_string()));
                        first_error.get_or_insert((id, e));
                    }
                }
            }
            // nothing came back at all: report the endpoint failure itself
            if let (true, Some((id, e))) = (records.is_empty(), first_error) {
                return Err(anyhow::Error::new(e).context(format!("every request failed; first failure on {id}")));
            }
            records
        }
    };
    ctx.write_with("generate/records.jsonl", |buf| Ok(write_records(&records, buf)?))?;
    ctx.write_with("generate/review.csv", |buf| Ok(write_review(&records, buf)?))?;
    let tag = match g.kind {
        PromptKind::Smp => "mf",
        PromptKind::Paraphrase => "mr",
    };
    let assembly = assemble_machine_corpus(
        &records,
        g.kind.target_label(),
        Some(&seeds),
        g.min_body_words,
        &format!("{}-{tag}", ctx.cfg.corpus.name),
    )
    .map_err(|e| match e {
        GenError::NoAcceptedRecords | GenError::Precondition(_) | GenError::Corpus(_) => invalid(e.to_string()),
        other => other.into(),
    })?;
    let out = ctx.output(&format!("generate/{tag}.jsonl"))?;
    write_corpus_with(&assembly.corpus, &out, Some(&ctx.provenance))?;
    ctx.write_with("generate/exclusions.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        for (id, reason) in &failures {
            w.serialize(ExclusionRow { origin_id: id, reason })?;
        }
        for e in &assembly.excluded {
            w.serialize(ExclusionRow { origin_id: &e.origin_id, reason: &e.reason })?;
        }
        w.flush()?;
        Ok(())
    })?;
    println!(
        "{} {} articles -> {}; {} excluded",
        assembly.corpus.len(),
        tag.to_uppercase(),
        out.display(),
        assembly.excluded.len() + failures.len()
    );
    Ok(())
}

fn read_embeddings(path: &Path) -> anyhow::Result<EmbeddingSet> {
    require_file(path, "embedding file")?;
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    EmbeddingSet::read_csv(BufReader::new(f)).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct MauveSummary {
    score: f64,
    num_clusters: usize,
    p_size: usize,
    q_size: usize,
}

pub fn mauve(ctx: &Ctx) -> anyhow::Result<()> {
    let m = &ctx.cfg.mauve;
    let (Some(p), Some(q)) = (m.p.as_deref(), m.q.as_deref()) else {
        bail!(Invalid("mauve needs two embedding files (mauve.p and mauve.q, or --p and --q)".into()));
    };
    let (ep, eq) = (read_embeddings(p)?, read_embeddings(q)?);
    let r = mauve_score(&ep, &eq, &m.config).map_err(|e| invalid(e.to_string()))?;
    ctx.write_json(
        "mauve/score.json",
        &MauveSummary { score: r.score, num_clusters: r.num_clusters, p_size: ep.len(), q_size: eq.len() },
    )?;
    ctx.write_with("mauve/frontier.csv", |buf| Ok(r.write_frontier_csv(buf)?))?;
    println!("MAUVE {:.4} ({} clusters)", r.score, r.num_clusters);
    Ok(())
}

pub fn kappa(ctx: &Ctx) -> anyhow::Result<()> {
    let k = &ctx.cfg.kappa;
    let (Some(a), Some(b)) = (k.a.as_deref(), k.b.as_deref()) else {
        bail!(Invalid("kappa needs two annotation files (kappa.a and kappa.b, or --a and --b)".into()));
    };
    let read = |p: &Path| -> anyhow::Result<_> {
        require_file(p, "annotation file")?;
        let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
        read_annotations(f).map_err(|e| invalid(format!("{}: {e}", p.display())))
    };
    let (ra, rb) = (read(a)?, read(b)?);
    let kappas = ra.kappa_against(&rb).map_err(|e| invalid(e.to_string()))?;
    let mut body = String::from("criterion,kappa,level\n");
    for (c, v) in &kappas {
        body.push_str(&format!("{c},{v},{}\n", interpret_kappa(*v)));
        println!("{c}: kappa {v:.4} ({})", interpret_kappa(*v));
    }
    ctx.write_text("kappa/kappa.csv", &body)?;

    if let (Some(orig), Some(generated)) = (&k.original, &k.generated) {
        let (eo, eg) = (read_embeddings(orig)?, read_embeddings(generated)?);
        let mut pairs = Vec::new();
        for (id, v) in eo.ids().iter().zip(eo.vectors()) {
            let w = eg.get(id).ok_or_else(|| invalid(format!("{id} has no generated embedding")))?;
            pairs.push((v.as_slice(), w));
        }
        if eg.len() != eo.len() {
            bail!(Invalid("original and generated embedding files list different ids".into()));
        }
        let score = semantic_consistency(&pairs).map_err(|e| invalid(e.to_string()))?;
        ctx.write_json("kappa/consistency.json", &BTreeMap::from([("semantic_consistency", score), ("pairs", pairs.len() as f64)]))?;
        println!("semantic consistency {score:.4} over {} pairs", pairs.len());
    }
    Ok(())
}
