//! Group-difference statistics: one-way ANOVA, Tukey–Kramer pairwise tests,
//! significance buckets and debiased feature selection.

pub mod qdist;
pub mod significance;

use statrs::distribution::{ContinuousCDF, FisherSnedecor};

pub use qdist::{studentized_range_cdf, studentized_range_sf};
pub use significance::{
    select_debiased_features, significance_table, Bucket, DebiasRule, Direction, PairwiseResult,
    SignificanceTable, Thresholds, TABLE_PAIRS,
};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum StatsError {
    #[error("need at least 2 groups, got {0}")]
    TooFewGroups(usize),
    #[error("group {group} has {n} sample(s); at least 2 are needed")]
    GroupTooSmall { group: String, n: usize },
    #[error("group {0} contains a non-finite value")]
    NonFinite(String),
    #[error("subgroup {0} is missing or has fewer than 2 samples")]
    MissingSubgroup(String),
    #[error("rule {rule} selects no features; use rule B or a stricter significance threshold")]
    EmptySelection { rule: String },
    #[error("invalid significance table: {0}")]
    InvalidTable(String),
    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),
}

pub type Result<T, E = StatsError> = std::result::Result<T, E>;

/// Samples of one quantity, split by group key.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSamples<K> {
    groups: Vec<(K, Vec<f64>)>,
}

impl<K: Clone + ToString> GroupSamples<K> {
    pub fn new(groups: Vec<(K, Vec<f64>)>) -> Result<Self> {
        if groups.len() < 2 {
            return Err(StatsError::TooFewGroups(groups.len()));
        }
        for (k, xs) in &groups {
            if xs.len() < 2 {
                return Err(StatsError::GroupTooSmall {
                    group: k.to_string(),
                    n: xs.len(),
                });
            }
            if xs.iter().any(|x| !x.is_finite()) {
                return Err(StatsError::NonFinite(k.to_string()));
            }
        }
        Ok(GroupSamples { groups })
    }

    pub fn groups(&self) -> &[(K, Vec<f64>)] {
        &self.groups
    }

    pub fn k(&self) -> usize {
        self.groups.len()
    }

    pub fn total(&self) -> usize {
        self.groups.iter().map(|(_, xs)| xs.len()).sum()
    }

    pub fn means(&self) -> Vec<f64> {
        self.groups.iter().map(|(_, xs)| mean(xs)).collect()
    }

    /// Within-group sum of squares and its degrees of freedom.
    fn within(&self) -> (f64, f64) {
        let ss: f64 = self
            .groups
            .iter()
            .map(|(_, xs)| {
                let m = mean(xs);
                xs.iter().map(|x| (x - m).powi(2)).sum::<f64>()
            })
            .sum();
        (ss, (self.total() - self.k()) as f64)
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnovaResult {
    pub f: f64,
    pub p: f64,
    pub df_between: f64,
    pub df_within: f64,
    pub ms_within: f64,
}

/// One-way ANOVA F-test. With zero within-group variance, equal means
/// give `F = 0, p = 1` and different means `F = ∞, p = 0`.
pub fn anova_oneway<K: Clone + ToString>(samples: &GroupSamples<K>) -> AnovaResult {
    let all: Vec<f64> = samples.groups.iter().flat_map(|(_, xs)| xs.iter().copied()).collect();
    let grand = mean(&all);
    let ss_between: f64 = samples
        .groups
        .iter()
        .map(|(_, xs)| xs.len() as f64 * (mean(xs) - grand).powi(2))
        .sum();
    let (ss_within, df_within) = samples.within();
    let df_between = (samples.k() - 1) as f64;
    let ms_within = ss_within / df_within;
    let scale = all.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
    let tiny = 1e-24 * scale * scale * all.len() as f64;
    let (f, p) = if ss_within <= tiny {
        if ss_between <= tiny {
            (0.0, 1.0)
        } else {
            (f64::INFINITY, 0.0)
        }
    } else {
        let f = (ss_between / df_between) / ms_within;
        let dist = FisherSnedecor::new(df_between, df_within).expect("positive degrees of freedom");
        (f, dist.sf(f).clamp(0.0, 1.0))
    };
    AnovaResult {
        f,
        p,
        df_between,
        df_within,
        ms_within,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TukeyPair<K> {
    pub a: K,
    pub b: K,
    /// `mean(a) - mean(b)`.
    pub mean_diff: f64,
    pub q: f64,
    pub p_value: f64,
}

/// Tukey–Kramer pairwise comparisons, one entry per unordered pair in
/// input order `(0,1), (0,2), ..., (1,2), ...`.
///
/// The standard error of a pair is `sqrt(MSW / 2 * (1/n_i + 1/n_j))` and
/// `p = P(Q > |mean_i - mean_j| / SE)` with `k` groups and `N - k` degrees
/// of freedom. With zero pooled variance `p` is 0 when the means differ and
/// 1 when they are equal.
pub fn tukey_hsd<K: Clone + ToString>(samples: &GroupSamples<K>) -> Vec<TukeyPair<K>> {
    let k = samples.k();
    let means = samples.means();
    let (ss_within, df) = samples.within();
    let msw = ss_within / df;
    let scale = means.iter().map(|m| m.abs()).fold(0.0, f64::max).max(1.0);
    let degenerate = msw <= 1e-24 * scale * scale;
    let mut out = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            let (ni, nj) = (samples.groups[i].1.len() as f64, samples.groups[j].1.len() as f64);
            let diff = means[i] - means[j];
            let (q, p) = if degenerate {
                if diff.abs() <= 1e-12 * scale {
                    (0.0, 1.0)
                } else {
                    (f64::INFINITY, 0.0)
                }
            } else {
                let se = (msw / 2.0 * (1.0 / ni + 1.0 / nj)).sqrt();
                let q = diff.abs() / se;
                (q, studentized_range_sf(q, k, df))
            };
            out.push(TukeyPair {
                a: samples.groups[i].0.clone(),
                b: samples.groups[j].0.clone(),
                mean_diff: diff,
                q,
                p_value: p,
            });
        }
    }
    out
}
