//! Subgroup-aware evaluation of detector outputs.

pub mod agreement;
pub mod diff;
pub mod report;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Subgroup};

pub use agreement::{
    cohens_kappa, cosine_consistency, interpret_kappa, read_annotations, semantic_consistency,
    AgreementLevel, Annotations,
};
pub use diff::{diff_reports, DiffEntry, DiffReport, Trend};
pub use report::{aggregate_reports, format_cell, render_table, AggregateReport, MeanStd};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("prediction ids do not match the corpus (missing: [{}], extra: [{}])", missing.join(", "), extra.join(", "))]
    IdMismatch { missing: Vec<String>, extra: Vec<String> },
    #[error("duplicate prediction for {0}")]
    DuplicatePrediction(String),
    #[error("prediction for {id}: {message}")]
    BadPrediction { id: String, message: String },
    #[error("AUROC needs both classes among the labels")]
    SingleClass,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    Empty,
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("reports are not comparable: {0}")]
    Incomparable(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = EvalError> = std::result::Result<T, E>;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// One detector output. `pred` is 1 (fake) exactly when `score >= τ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub article_id: String,
    pub score: f64,
    pub pred: u8,
}

impl Prediction {
    pub fn from_score(article_id: impl Into<String>, score: f64, threshold: f64) -> Self {
        Prediction {
            article_id: article_id.into(),
            score,
            pred: (score >= threshold) as u8,
        }
    }

    pub fn validate(&self, threshold: f64) -> Result<()> {
        let bad = |message: String| EvalError::BadPrediction {
            id: self.article_id.clone(),
            message,
        };
        if !(0.0..=1.0).contains(&self.score) {
            return Err(bad(format!("score {} outside [0, 1]", self.score)));
        }
        if self.pred > 1 {
            return Err(bad(format!("pred {} is not 0 or 1", self.pred)));
        }
        if self.pred != (self.score >= threshold) as u8 {
            return Err(bad(format!(
                "pred {} disagrees with score {} at threshold {threshold}",
                self.pred, self.score
            )));
        }
        Ok(())
    }
}

/// Reads JSON-lines predictions; blank lines are skipped.
pub fn read_predictions(input: impl BufRead) -> Result<Vec<Prediction>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let p: Prediction = serde_json::from_str(&line).map_err(|e| EvalError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(p);
    }
    Ok(out)
}

pub fn write_predictions(mut out: impl Write, preds: &[Prediction]) -> Result<()> {
    for p in preds {
        serde_json::to_writer(&mut out, p)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Metrics over one prediction set. Accuracies and rates are fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub corpus: String,
    pub per_subgroup_accuracy: BTreeMap<Subgroup, f64>,
    pub counts: BTreeMap<Subgroup, usize>,
    pub overall_accuracy: f64,
    pub f1: f64,
    pub recall: f64,
    pub precision: f64,
    /// Absent when the evaluated articles contain a single class.
    pub auroc: Option<f64>,
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
}

impl EvalReport {
    pub fn accuracy(&self, g: Subgroup) -> Option<f64> {
        self.per_subgroup_accuracy.get(&g).copied()
    }

    pub fn subgroups(&self) -> Vec<Subgroup> {
        self.per_subgroup_accuracy.keys().copied().collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Named metrics in report column order: subgroup accuracies, overall,
    /// F1, recall, precision, AUROC.
    pub fn metrics(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = self
            .per_subgroup_accuracy
            .iter()
            .map(|(g, a)| (g.to_string(), *a))
            .collect();
        out.push(("Overall".into(), self.overall_accuracy));
        out.push(("F1".into(), self.f1));
        out.push(("Recall".into(), self.recall));
        out.push(("Precision".into(), self.precision));
        if let Some(a) = self.auroc {
            out.push(("AUROC".into(), a));
        }
        out
    }
}

/// Scores predictions against the gold labels of `corpus`.
pub fn evaluate(preds: &[Prediction], corpus: &Corpus, threshold: f64) -> Result<EvalReport> {
    let mut by_id: HashMap<&str, &Prediction> = HashMap::with_capacity(preds.len());
    for p in preds {
        p.validate(threshold)?;
        if by_id.insert(&p.article_id, p).is_some() {
            return Err(EvalError::DuplicatePrediction(p.article_id.clone()));
        }
    }
    let corpus_ids: HashSet<&str> = corpus.articles().iter().map(|a| a.id.as_str()).collect();
    let mut missing: Vec<String> = corpus_ids
        .iter()
        .filter(|id| !by_id.contains_key(*id))
        .map(|s| s.to_string())
        .collect();
    let mut extra: Vec<String> = by_id
        .keys()
        .filter(|id| !corpus_ids.contains(*id))
        .map(|s| s.to_string())
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        missing.sort();
        extra.sort();
        return Err(EvalError::IdMismatch { missing, extra });
    }
    if corpus.is_empty() {
        return Err(EvalError::Empty);
    }

    let mut correct: BTreeMap<Subgroup, usize> = BTreeMap::new();
    let mut counts: BTreeMap<Subgroup, usize> = BTreeMap::new();
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    let mut scores = Vec::with_capacity(corpus.len());
    let mut labels = Vec::with_capacity(corpus.len());
    for a in corpus.articles() {
        let p = by_id[a.id.as_str()];
        let g = a.subgroup();
        let y = a.label.as_u8();
        *counts.entry(g).or_default() += 1;
        if p.pred == y {
            *correct.entry(g).or_default() += 1;
        }
        match (p.pred, y) {
            (1, 1) => tp += 1,
            (1, 0) => fp += 1,
            (0, 1) => fn_ += 1,
            _ => {}
        }
        scores.push(p.score);
        labels.push(y);
    }
    let per_subgroup_accuracy = counts
        .iter()
        .map(|(g, n)| (*g, *correct.get(g).unwrap_or(&0) as f64 / *n as f64))
        .collect();
    let total_correct: usize = correct.values().sum();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(EvalReport {
        corpus: corpus.name().to_string(),
        per_subgroup_accuracy,
        counts,
        overall_accuracy: ratio(total_correct, corpus.len()),
        f1,
        recall,
        precision,
        auroc: auroc(&scores, &labels).ok(),
        threshold,
        seed: None,
        split: None,
    })
}

/// Area under the ROC curve by the Mann–Whitney rank statistic. Tied
/// scores receive their average rank, so each tied positive/negative pair
/// counts one half.
pub fn auroc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch(scores.len(), labels.len()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(EvalError::NonFinite("scores".into()));
    }
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // twice the rank sum of positives keeps midranks integral
    let mut rank2_pos: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1, average (i + j + 2) / 2
        let mid2 = (i + j + 2) as u128;
        let pos_in_tie = order[i..=j].iter().filter(|&&k| labels[k] == 1).count() as u128;
        rank2_pos += mid2 * pos_in_tie;
        i = j + 1;
    }
    let (np, nn) = (n_pos as u128, n_neg as u128);
    // U = R - np(np+1)/2, doubled
    let u2 = rank2_pos - np * (np + 1);
    Ok(u2 as f64 / (2 * np * nn) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Article, Label, Source};

    fn article(id: &str, label: Label, source: Source) -> Article {
        Article {
            id: id.into(),
            title: "t".into(),
            text: "x".into(),
            label,
            source,
            origin_id: None,
        }
    }

    fn fixture() -> Corpus {
        let mut v = Vec::new();
        for g in Subgroup::ALL {
            for j in 0..2 {
                v.push(article(&format!("{g}{j}"), g.label(), g.source()));
            }
        }
        Corpus::new("fixture", v).unwrap()
    }

    #[test]
    fn hand_auroc() {
        assert_eq!(auroc(&[0.9, 0.8, 0.3, 0.2], &[1, 1, 0, 0]).unwrap(), 1.0);
        assert_eq!(auroc(&[0.9, 0.2, 0.8, 0.3], &[1, 0, 0, 1]).unwrap(), 0.75);
        assert_eq!(auroc(&[0.4; 6], &[1, 0, 1, 0, 0, 1]).unwrap(), 0.5);
        assert!(matches!(auroc(&[0.1, 0.2], &[1, 1]), Err(EvalError::SingleClass)));
    }

    #[test]
    fn all_correct() {
        let c = fixture();
        let preds: Vec<Prediction> = c
            .articles()
            .iter()
            .map(|a| Prediction::from_score(&a.id, a.label.as_u8() as f64, 0.5))
            .collect();
        let r = evaluate(&preds, &c, 0.5).unwrap();
        assert!(r.per_subgroup_accuracy.values().all(|&a| a == 1.0));
        assert_eq!((r.overall_accuracy, r.f1, r.auroc), (1.0, 1.0, Some(1.0)));
    }

    #[test]
    fn six_of_eight() {
        let c = fixture();
        // flip one HF and one MR prediction
        let preds: Vec<Prediction> = c
            .articles()
            .iter()
            .map(|a| {
                let mut y = a.label.as_u8();
                if a.id == "HF0" || a.id == "MR1" {
                    y = 1 - y;
                }
                Prediction::from_score(&a.id, y as f64, 0.5)
            })
            .collect();
        let r = evaluate(&preds, &c, 0.5).unwrap();
        assert_eq!(r.overall_accuracy, 0.75);
        assert_eq!(r.accuracy(Subgroup::HF), Some(0.5));
        assert_eq!(r.accuracy(Subgroup::MR), Some(0.5));
        assert_eq!(r.accuracy(Subgroup::HR), Some(1.0));
        assert_eq!(r.accuracy(Subgroup::MF), Some(1.0));
        // tp 3, fp 1, fn 1
        assert_eq!((r.precision, r.recall), (0.75, 0.75));
    }

    #[test]
    fn id_mismatch_lists_ids() {
        let c = fixture();
        let mut preds: Vec<Prediction> = c
            .articles()
            .iter()
            .skip(1)
            .map(|a| Prediction::from_score(&a.id, 0.2, 0.5))
            .collect();
        preds.push(Prediction::from_score("ghost", 0.2, 0.5));
        let err = evaluate(&preds, &c, 0.5).unwrap_err().to_string();
        assert!(err.contains("missing: [HR0]") && err.contains("extra: [ghost]"), "{err}");
    }

    #[test]
    fn inconsistent_pred_rejected() {
        let p = Prediction { article_id: "a".into(), score: 0.7, pred: 0 };
        assert!(p.validate(0.5).is_err());
        assert!(p.validate(0.8).is_ok());
    }

    #[test]
    fn predictions_round_trip() {
        let preds = vec![Prediction::from_score("a", 0.25, 0.5), Prediction::from_score("b", 0.75, 0.5)];
        let mut buf = Vec::new();
        write_predictions(&mut buf, &preds).unwrap();
        assert_eq!(read_predictions(buf.as_slice()).unwrap(), preds);
    }
}
