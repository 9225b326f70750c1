//! Run configuration, read from a TOML file.
//!
//! Relative paths in the file are resolved against the file's directory.
//! The top-level `seed` drives every seeded component (split, model
//! fitting, k-means, retry jitter); per-section seeds are overwritten.

use std::path::{Path, PathBuf};

use anyhow::Context;
use fakeaudit::corpus::SplitSpec;
use fakeaudit::llmgen::{LlmEndpointConfig, PromptKind, DEFAULT_MIN_BODY_WORDS};
use fakeaudit::mauve::MauveConfig;
use fakeaudit::models::{FitConfig, ModelKind};
use fakeaudit::stats::{DebiasRule, Thresholds};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Invalid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Directory of lexicon files overriding the built-in ones.
    pub lexicon_dir: Option<PathBuf>,
    pub corpus: CorpusSection,
    pub split: SplitSection,
    pub audit: AuditSection,
    pub models: ModelsSection,
    pub eval: EvalSection,
    pub augment: AugmentSection,
    pub generate: GenerateSection,
    pub llm: LlmEndpointConfig,
    pub mauve: MauveSection,
    pub kappa: KappaSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out_dir: PathBuf::from("out"),
            lexicon_dir: None,
            corpus: CorpusSection::default(),
            split: SplitSection::default(),
            audit: AuditSection::default(),
            models: ModelsSection::default(),
            eval: EvalSection::default(),
            augment: AugmentSection::default(),
            generate: GenerateSection::default(),
            llm: LlmEndpointConfig::default(),
            mauve: MauveSection::default(),
            kappa: KappaSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    /// JSON Lines corpora merged at ingest.
    pub paths: Vec<PathBuf>,
    pub name: String,
}

impl Default for CorpusSection {
    fn default() -> Self {
        CorpusSection { paths: Vec::new(), name: "corpus".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    pub train_fraction: f64,
    pub stratify_by_subgroup: bool,
}

impl Default for SplitSection {
    fn default() -> Self {
        let d = SplitSpec::default();
        SplitSection { train_fraction: d.train_fraction, stratify_by_subgroup: d.stratify_by_subgroup }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditSection {
    pub thresholds: Thresholds,
    pub rule: DebiasRule,
}

impl Default for AuditSection {
    fn default() -> Self {
        AuditSection { thresholds: Thresholds::default(), rule: DebiasRule::A }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelsSection {
    pub kinds: Vec<ModelKind>,
    pub fit: FitConfig,
}

impl Default for ModelsSection {
    fn default() -> Self {
        ModelsSection { kinds: vec![ModelKind::Logreg], fit: FitConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub threshold: f64,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection { threshold: fakeaudit::eval::DEFAULT_THRESHOLD }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentSection {
    /// Extra machine-paraphrased real corpora. When empty, the MR articles
    /// already in the training split are used.
    pub paths: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateSection {
    pub kind: PromptKind,
    pub templates_dir: Option<PathBuf>,
    /// Use only the first `limit` seeds (by id).
    pub limit: Option<usize>,
    pub min_body_words: usize,
}

impl Default for GenerateSection {
    fn default() -> Self {
        GenerateSection { kind: PromptKind::Smp, templates_dir: None, limit: None, min_body_words: DEFAULT_MIN_BODY_WORDS }
    }
}

// flatten rules out deny_unknown_fields here
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MauveSection {
    /// Embedding CSV of the first collection (e.g. human-written).
    pub p: Option<PathBuf>,
    pub q: Option<PathBuf>,
    #[serde(flatten)]
    pub config: MauveConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KappaSection {
    /// Annotation CSVs of two raters.
    pub a: Option<PathBuf>,
    pub b: Option<PathBuf>,
    /// Optional embedding CSVs of originals and their rewrites, paired by id.
    pub original: Option<PathBuf>,
    pub generated: Option<PathBuf>,
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn resolve_opt(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(p) = p {
        resolve(base, p);
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Invalid(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Invalid(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.resolve_paths(&base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        resolve(base, &mut self.out_dir);
        resolve_opt(base, &mut self.lexicon_dir);
        self.corpus.paths.iter_mut().for_each(|p| resolve(base, p));
        self.augment.paths.iter_mut().for_each(|p| resolve(base, p));
        resolve_opt(base, &mut self.generate.templates_dir);
        for p in [&mut self.mauve.p, &mut self.mauve.q, &mut self.kappa.a, &mut self.kappa.b] {
            resolve_opt(base, p);
        }
        resolve_opt(base, &mut self.kappa.original);
        resolve_opt(base, &mut self.kappa.generated);
    }

    /// Propagates the top-level seed and validates every section.
    pub fn finalize(&mut self) -> anyhow::Result<()> {
        self.models.fit.seed = self.seed;
        self.mauve.config.seed = self.seed;
        self.llm.seed = self.seed;
        self.split_spec().validate().map_err(|e| Invalid(e.to_string()))?;
        self.audit.thresholds.validate().map_err(|e| Invalid(e.to_string()))?;
        self.models.fit.validate().map_err(|e| Invalid(e.to_string()))?;
        self.mauve.config.validate().map_err(|e| Invalid(e.to_string()))?;
        self.llm.validate().map_err(|e| Invalid(e.to_string()))?;
        if self.models.kinds.is_empty() {
            return Err(Invalid("models.kinds is empty".into()).into());
        }
        if !(self.eval.threshold > 0.0 && self.eval.threshold < 1.0) {
            return Err(Invalid(format!("eval.threshold {} outside (0, 1)", self.eval.threshold)).into());
        }
        if self.corpus.name.trim().is_empty() {
            return Err(Invalid("corpus.name is empty".into()).into());
        }
        Ok(())
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            train_fraction: self.split.train_fraction,
            seed: self.seed,
            stratify_by_subgroup: self.split.stratify_by_subgroup,
        }
    }

    /// Hash of the effective configuration. The output directory is left
    /// out so that runs into different directories can be compared.
    pub fn hash(&self) -> anyhow::Result<String> {
        let mut c = self.clone();
        c.out_dir = PathBuf::new();
        let json = serde_json::to_string(&c).context("serializing config")?;
        let digest = Sha256::digest(json.as_bytes());
        Ok(digest.iter().take(8).map(|b| format!("{b:02x}")).collect())
    }
}

/// Fails with a validation error unless `path` exists.
pub fn require_file(path: &Path, what: &str) -> anyhow::Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Invalid(format!("{what} not found: {}", path.display())).into())
    }
}
