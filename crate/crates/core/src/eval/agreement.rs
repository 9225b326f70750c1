//! Annotator agreement and embedding-based semantic consistency.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::Hash;
use std::io::Read;

use serde::Serialize;

use super::{EvalError, Result};

/// Unweighted Cohen's kappa between two raters over the same items.
///
/// When chance agreement is 1 (both raters used one identical category for
/// every item) the raters agree perfectly and 1 is returned.
pub fn cohens_kappa<T: Eq + Hash + Ord>(a: &[T], b: &[T]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(EvalError::Empty);
    }
    let n = a.len() as f64;
    let mut ca: BTreeMap<&T, usize> = BTreeMap::new();
    let mut cb: BTreeMap<&T, usize> = BTreeMap::new();
    let mut agree = 0usize;
    for (x, y) in a.iter().zip(b) {
        *ca.entry(x).or_default() += 1;
        *cb.entry(y).or_default() += 1;
        agree += (x == y) as usize;
    }
    let p_o = agree as f64 / n;
    let p_e: f64 = ca
        .iter()
        .map(|(k, &na)| na as f64 * *cb.get(k).unwrap_or(&0) as f64)
        .sum::<f64>()
        / (n * n);
    if (1.0 - p_e).abs() < 1e-15 {
        return Ok(1.0);
    }
    Ok(((p_o - p_e) / (1.0 - p_e)).clamp(-1.0, 1.0))
}

/// Verbal agreement levels for kappa, following McHugh's scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum AgreementLevel {
    None,
    Minimal,
    Weak,
    Moderate,
    Strong,
    AlmostPerfect,
}

impl fmt::Display for AgreementLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgreementLevel::None => "none",
            AgreementLevel::Minimal => "minimal",
            AgreementLevel::Weak => "weak",
            AgreementLevel::Moderate => "moderate",
            AgreementLevel::Strong => "strong",
            AgreementLevel::AlmostPerfect => "almost perfect",
        })
    }
}

pub fn interpret_kappa(kappa: f64) -> AgreementLevel {
    match kappa {
        k if k > 0.90 => AgreementLevel::AlmostPerfect,
        k if k >= 0.80 => AgreementLevel::Strong,
        k if k >= 0.60 => AgreementLevel::Moderate,
        k if k >= 0.40 => AgreementLevel::Weak,
        k if k > 0.20 => AgreementLevel::Minimal,
        _ => AgreementLevel::None,
    }
}

pub fn cosine_consistency(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(EvalError::Empty);
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite("embedding".into()));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(EvalError::ZeroVector);
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Mean cosine similarity over (original, generated) embedding pairs.
pub fn semantic_consistency(pairs: &[(&[f64], &[f64])]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut total = 0.0;
    for (a, b) in pairs {
        total += cosine_consistency(a, b)?;
    }
    Ok(total / pairs.len() as f64)
}

/// Ratings from one annotator: CSV with an `id` column followed by one
/// column per rated criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Annotations {
    pub criteria: Vec<String>,
    pub ratings: BTreeMap<String, Vec<String>>,
}

pub fn read_annotations(input: impl Read) -> Result<Annotations> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("id") || headers.len() < 2 {
        return Err(EvalError::Parse {
            line: 1,
            message: "header must be `id` followed by at least one criterion".into(),
        });
    }
    let criteria: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut ratings = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let id = rec[0].to_string();
        let vals: Vec<String> = rec.iter().skip(1).map(|s| s.trim().to_string()).collect();
        if ratings.insert(id.clone(), vals).is_some() {
            return Err(EvalError::Parse {
                line: i + 2,
                message: format!("duplicate id {id}"),
            });
        }
    }
    if ratings.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(Annotations { criteria, ratings })
}

impl Annotations {
    /// Kappa per shared criterion, in this annotator's column order. Both
    /// annotators must have rated the same items.
    pub fn kappa_against(&self, other: &Annotations) -> Result<Vec<(String, f64)>> {
        let mine: BTreeSet<&String> = self.ratings.keys().collect();
        let theirs: BTreeSet<&String> = other.ratings.keys().collect();
        if mine != theirs {
            let missing: Vec<String> = mine.difference(&theirs).map(|s| s.to_string()).collect();
            let extra: Vec<String> = theirs.difference(&mine).map(|s| s.to_string()).collect();
            return Err(EvalError::IdMismatch { missing, extra });
        }
        let mut out = Vec::new();
        for (ci, c) in self.criteria.iter().enumerate() {
            let Some(cj) = other.criteria.iter().position(|x| x == c) else {
                continue;
            };
            let a: Vec<&str> = self.ratings.values().map(|r| r[ci].as_str()).collect();
            let b: Vec<&str> = other.ratings.values().map(|r| r[cj].as_str()).collect();
            out.push((c.clone(), cohens_kappa(&a, &b)?));
        }
        if out.is_empty() {
            return Err(EvalError::Incomparable("no shared criteria".into()));
        }
        Ok(out)
    }
}
