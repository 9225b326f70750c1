//! Baseline detectors: logistic regression and a CART tree, both trained on
//! a named subset of content features.

pub mod logreg;
pub mod tree;

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::textfeat::{FeatureMatrix, FeatureVector};

pub use logreg::{fit_logreg, loss_and_gradient, sigmoid, LogRegModel, Standardization};
pub use tree::{fit_tree, Node, TreeModel};

/// Version written into every serialized model document.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("need at least 2 training rows, got {0}")]
    TooFewRows(usize),
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("label {0} is not 0 or 1")]
    BadLabel(u8),
    #[error("every feature is constant on the training data")]
    NoUsableFeatures,
    #[error("missing feature {0:?}")]
    MissingFeature(String),
    #[error("invalid fit config: {0}")]
    InvalidConfig(String),
    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),
    #[error("model document: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            learning_rate: 0.1,
            epochs: 500,
            l2: 1e-4,
            max_depth: 8,
            min_leaf: 5,
            seed: 0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(ModelError::InvalidConfig(format!("learning_rate must be > 0, got {}", self.learning_rate)));
        }
        if self.epochs == 0 {
            return Err(ModelError::InvalidConfig("epochs must be positive".into()));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return Err(ModelError::InvalidConfig(format!("l2 must be >= 0, got {}", self.l2)));
        }
        if self.min_leaf == 0 {
            return Err(ModelError::InvalidConfig("min_leaf must be positive".into()));
        }
        Ok(())
    }
}

pub(crate) fn check_training_data(x: &[Vec<f64>], y: &[u8], width: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(ModelError::Shape(format!("{} rows but {} labels", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(ModelError::TooFewRows(x.len()));
    }
    if width == 0 {
        return Err(ModelError::Shape("no features".into()));
    }
    for (row, r) in x.iter().enumerate() {
        if r.len() != width {
            return Err(ModelError::Shape(format!("row {row} has {} values, expected {width}", r.len())));
        }
        if let Some(col) = r.iter().position(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite { row, col });
        }
    }
    if let Some(&bad) = y.iter().find(|&&v| v > 1) {
        return Err(ModelError::BadLabel(bad));
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(ModelError::SingleClass);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Logreg,
    Tree,
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "logreg" | "lr" | "logistic" => Ok(ModelKind::Logreg),
            "tree" | "cart" => Ok(ModelKind::Tree),
            _ => Err(format!("unknown model kind {s:?} (expected logreg or tree)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TrainedModel {
    Logreg(LogRegModel),
    Tree(TreeModel),
}

impl TrainedModel {
    pub fn fit(kind: ModelKind, x: &[Vec<f64>], y: &[u8], names: &[String], cfg: &FitConfig) -> Result<Self> {
        Ok(match kind {
            ModelKind::Logreg => TrainedModel::Logreg(fit_logreg(x, y, names, cfg)?),
            ModelKind::Tree => TrainedModel::Tree(fit_tree(x, y, names, cfg)?),
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::Logreg(_) => ModelKind::Logreg,
            TrainedModel::Tree(_) => ModelKind::Tree,
        }
    }

    pub fn feature_subset(&self) -> &[String] {
        match self {
            TrainedModel::Logreg(m) => &m.feature_subset,
            TrainedModel::Tree(m) => &m.feature_subset,
        }
    }

    /// Positions of this model's features within `names`.
    pub fn resolve(&self, names: &[String]) -> Result<Vec<usize>> {
        let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        self.feature_subset()
            .iter()
            .map(|f| index.get(f.as_str()).copied().ok_or_else(|| ModelError::MissingFeature(f.clone())))
            .collect()
    }

    /// Probability of fake for a row aligned to `feature_subset`.
    pub fn predict_aligned(&self, row: &[f64]) -> f64 {
        match self {
            TrainedModel::Logreg(m) => m.predict_aligned(row),
            TrainedModel::Tree(m) => m.predict_aligned(row),
        }
    }

    /// Probability of fake for a row whose columns are named by `names`.
    pub fn predict_named(&self, names: &[String], values: &[f64]) -> Result<f64> {
        let idx = self.resolve(names)?;
        let row: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        Ok(self.predict_aligned(&row))
    }

    pub fn predict_vector(&self, v: &FeatureVector) -> Result<f64> {
        let row = self
            .feature_subset()
            .iter()
            .map(|f| v.get(f).ok_or_else(|| ModelError::MissingFeature(f.clone())))
            .collect::<Result<Vec<f64>>>()?;
        Ok(self.predict_aligned(&row))
    }

    /// Scores every row of `matrix`, in row order.
    pub fn predict_matrix(&self, matrix: &FeatureMatrix) -> Result<Vec<f64>> {
        let idx = self.resolve(&matrix.names)?;
        Ok(matrix
            .rows
            .iter()
            .map(|r| {
                let row: Vec<f64> = idx.iter().map(|&i| r.values[i]).collect();
                self.predict_aligned(&row)
            })
            .collect())
    }
}

/// Serialized form of a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    pub model: TrainedModel,
    pub config: FitConfig,
    pub seed: u64,
    /// Free-form provenance (tool version, config hash).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

impl ModelDocument {
    pub fn new(model: TrainedModel, config: FitConfig) -> Self {
        ModelDocument {
            format_version: MODEL_FORMAT_VERSION,
            seed: config.seed,
            model,
            config,
            provenance: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(ModelError::UnsupportedVersion(doc.format_version));
        }
        Ok(doc)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}

/// Rows of `matrix` restricted to `names`, with fake labels (1 = fake).
pub fn design_matrix(matrix: &FeatureMatrix, names: &[String]) -> Result<(Vec<Vec<f64>>, Vec<u8>)> {
    if let Some(missing) = names.iter().find(|n| matrix.column_index(n).is_none()) {
        return Err(ModelError::MissingFeature(missing.clone()));
    }
    let x = matrix.select(names).map_err(|e| ModelError::Shape(e.to_string()))?;
    let y = matrix.rows.iter().map(|r| r.subgroup.label().as_u8()).collect();
    Ok((x, y))
}
