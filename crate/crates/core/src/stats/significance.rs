//! Per-feature significance table over the HF/MF/HR subgroups and the
//! debiased feature-selection rules built on it.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{tukey_hsd, GroupSamples, Result, StatsError};
use crate::corpus::Subgroup;
use crate::textfeat::FeatureMatrix;

/// Compared pairs, in table column order.
pub const TABLE_PAIRS: [(Subgroup, Subgroup); 3] = [
    (Subgroup::HF, Subgroup::MF),
    (Subgroup::MF, Subgroup::HR),
    (Subgroup::HF, Subgroup::HR),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Less,
    Greater,
    None,
}

impl Direction {
    pub fn symbol(self) -> &'static str {
        match self {
            Direction::Less => "<",
            Direction::Greater => ">",
            Direction::None => "-",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bucket {
    Ns,
    B1,
    B2,
    B3,
    B4,
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Bucket::Ns => "ns",
            Bucket::B1 => "b1",
            Bucket::B2 => "b2",
            Bucket::B3 => "b3",
            Bucket::B4 => "b4",
        })
    }
}

impl std::str::FromStr for Bucket {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "ns" => Bucket::Ns,
            "b1" => Bucket::B1,
            "b2" => Bucket::B2,
            "b3" => Bucket::B3,
            "b4" => Bucket::B4,
            _ => return Err(format!("unknown bucket {s:?}")),
        })
    }
}

/// Upper p-value bounds of buckets b1..b4 (strict `p < bound`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            b1: 0.05,
            b2: 0.01,
            b3: 0.001,
            b4: 0.0001,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        let t = [self.b1, self.b2, self.b3, self.b4];
        let ok = t.iter().all(|x| *x > 0.0 && *x <= 1.0) && t.windows(2).all(|w| w[0] > w[1]);
        if ok {
            Ok(())
        } else {
            Err(StatsError::InvalidThresholds(format!(
                "need 1 >= b1 > b2 > b3 > b4 > 0, got {t:?}"
            )))
        }
    }

    pub fn bucket(&self, p: f64) -> Bucket {
        if p < self.b4 {
            Bucket::B4
        } else if p < self.b3 {
            Bucket::B3
        } else if p < self.b2 {
            Bucket::B2
        } else if p < self.b1 {
            Bucket::B1
        } else {
            Bucket::Ns
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseResult {
    pub feature: String,
    pub pair: (Subgroup, Subgroup),
    /// Sign of `mean(pair.0) - mean(pair.1)`; `None` iff the bucket is ns.
    pub direction: Direction,
    pub p_value: f64,
    pub bucket: Bucket,
}

impl PairwiseResult {
    fn from_test(feature: &str, pair: (Subgroup, Subgroup), mean_diff: f64, p: f64, t: &Thresholds) -> Self {
        let bucket = t.bucket(p);
        let direction = if bucket == Bucket::Ns || mean_diff == 0.0 {
            Direction::None
        } else if mean_diff < 0.0 {
            Direction::Less
        } else {
            Direction::Greater
        };
        // a non-ns bucket with equal means cannot happen: equal means give p = 1
        let bucket = if direction == Direction::None { Bucket::Ns } else { bucket };
        PairwiseResult {
            feature: feature.to_string(),
            pair,
            direction,
            p_value: p,
            bucket,
        }
    }

    /// Direction of the underlying mean difference, kept for rebucketing.
    fn raw_sign(&self) -> f64 {
        match self.direction {
            Direction::Less => -1.0,
            Direction::Greater => 1.0,
            Direction::None => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceTable {
    rows: Vec<PairwiseResult>,
    thresholds: Thresholds,
    /// Sign of the mean difference per row, including ns rows.
    signs: Vec<f64>,
}

impl SignificanceTable {
    /// Builds a table from rows given feature by feature, each feature with
    /// exactly the three [`TABLE_PAIRS`] in order.
    pub fn from_rows(rows: Vec<PairwiseResult>, thresholds: Thresholds) -> Result<Self> {
        thresholds.validate()?;
        if rows.len() % 3 != 0 {
            return Err(StatsError::InvalidTable(format!("{} rows is not a multiple of 3", rows.len())));
        }
        for chunk in rows.chunks(3) {
            for (r, pair) in chunk.iter().zip(TABLE_PAIRS) {
                if r.feature != chunk[0].feature || r.pair != pair {
                    return Err(StatsError::InvalidTable(format!(
                        "feature {:?}: expected pairs HF-MF, MF-HR, HF-HR in order",
                        chunk[0].feature
                    )));
                }
                if (r.direction == Direction::None) != (r.bucket == Bucket::Ns) {
                    return Err(StatsError::InvalidTable(format!(
                        "feature {:?}: direction must be none exactly when the bucket is ns",
                        r.feature
                    )));
                }
            }
        }
        let signs = rows.iter().map(PairwiseResult::raw_sign).collect();
        Ok(SignificanceTable { rows, thresholds, signs })
    }

    pub fn rows(&self) -> &[PairwiseResult] {
        &self.rows
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds
    }

    /// Feature names in table order.
    pub fn features(&self) -> Vec<&str> {
        self.rows.iter().step_by(3).map(|r| r.feature.as_str()).collect()
    }

    pub fn cell(&self, feature: &str, pair: (Subgroup, Subgroup)) -> Option<&PairwiseResult> {
        self.rows.iter().find(|r| r.feature == feature && r.pair == pair)
    }

    /// Reassigns buckets (and directions) from the stored p-values.
    pub fn rebucket(&self, thresholds: Thresholds) -> Result<SignificanceTable> {
        thresholds.validate()?;
        let rows = self
            .rows
            .iter()
            .zip(&self.signs)
            .map(|(r, sign)| PairwiseResult::from_test(&r.feature, r.pair, *sign, r.p_value, &thresholds))
            .collect();
        Ok(SignificanceTable {
            rows,
            thresholds,
            signs: self.signs.clone(),
        })
    }

    pub fn write_csv<W: Write>(&self, out: W, provenance: Option<&str>) -> std::io::Result<()> {
        let mut out = out;
        if let Some(p) = provenance {
            writeln!(out, "# {p}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["feature", "group_pair", "direction", "p_value", "bucket"])?;
        for r in &self.rows {
            w.write_record([
                r.feature.clone(),
                format!("{}-{}", r.pair.0, r.pair.1),
                format!("{:?}", r.direction).to_lowercase(),
                format!("{:e}", r.p_value),
                r.bucket.to_string(),
            ])?;
        }
        w.flush()
    }

    /// One line per feature with a cell per compared pair, e.g. `HF < MF b4`
    /// or `-` when not significant.
    pub fn render_text(&self) -> String {
        let width = self.rows.iter().map(|r| r.feature.len()).max().unwrap_or(7).max(7);
        let mut s = String::new();
        let _ = write!(s, "{:<width$}", "feature");
        for (a, b) in TABLE_PAIRS {
            let _ = write!(s, "  {:<12}", format!("{a} vs {b}"));
        }
        s.push('\n');
        for chunk in self.rows.chunks(3) {
            let _ = write!(s, "{:<width$}", chunk[0].feature);
            for r in chunk {
                let cell = if r.bucket == Bucket::Ns {
                    "-".to_string()
                } else {
                    format!("{} {} {} {}", r.pair.0, r.direction.symbol(), r.pair.1, r.bucket)
                };
                let _ = write!(s, "  {cell:<12}");
            }
            s.push('\n');
        }
        s.push_str(&format!(
            "buckets: b1 p<{}, b2 p<{}, b3 p<{}, b4 p<{}\n",
            self.thresholds.b1, self.thresholds.b2, self.thresholds.b3, self.thresholds.b4
        ));
        s
    }
}

/// Tukey–Kramer tests over {HF, MF, HR} for every column of `matrix`.
/// Rows of other subgroups (MR) are ignored.
pub fn significance_table(matrix: &FeatureMatrix, thresholds: &Thresholds) -> Result<SignificanceTable> {
    thresholds.validate()?;
    let order = [Subgroup::HF, Subgroup::MF, Subgroup::HR];
    let mut by_group: BTreeMap<Subgroup, Vec<usize>> = BTreeMap::new();
    for (i, r) in matrix.rows.iter().enumerate() {
        by_group.entry(r.subgroup).or_default().push(i);
    }
    for g in order {
        if by_group.get(&g).map_or(0, Vec::len) < 2 {
            return Err(StatsError::MissingSubgroup(g.to_string()));
        }
    }
    let mut rows = Vec::with_capacity(3 * matrix.names.len());
    let mut signs = Vec::with_capacity(3 * matrix.names.len());
    for (col, name) in matrix.names.iter().enumerate() {
        let groups = order
            .iter()
            .map(|g| (*g, by_group[g].iter().map(|&i| matrix.rows[i].values[col]).collect()))
            .collect();
        let samples = GroupSamples::new(groups)?;
        let pairs = tukey_hsd(&samples);
        for (a, b) in TABLE_PAIRS {
            let t = pairs
                .iter()
                .find(|t| (t.a, t.b) == (a, b) || (t.a, t.b) == (b, a))
                .expect("all pairs tested");
            let diff = if t.a == a { t.mean_diff } else { -t.mean_diff };
            rows.push(PairwiseResult::from_test(name, (a, b), diff, t.p_value, thresholds));
            signs.push(if diff == 0.0 { 0.0 } else { diff.signum() });
        }
    }
    Ok(SignificanceTable {
        rows,
        thresholds: *thresholds,
        signs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DebiasRule {
    /// Features with no significant HF–MF difference.
    A,
    /// Rule A plus features with a significant HF–HR difference.
    B,
}

impl fmt::Display for DebiasRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DebiasRule::A => "A",
            DebiasRule::B => "B",
        })
    }
}

impl std::str::FromStr for DebiasRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "A" | "a" => Ok(DebiasRule::A),
            "B" | "b" => Ok(DebiasRule::B),
            _ => Err(format!("unknown debias rule {s:?} (expected A or B)")),
        }
    }
}

/// Selected feature names, in table order.
pub fn select_debiased_features(table: &SignificanceTable, rule: DebiasRule) -> Result<Vec<String>> {
    let keep: Vec<String> = table
        .rows
        .chunks(3)
        .filter(|c| {
            let hf_mf_ns = c[0].bucket == Bucket::Ns;
            let hf_hr_sig = c[2].bucket != Bucket::Ns;
            match rule {
                DebiasRule::A => hf_mf_ns,
                DebiasRule::B => hf_mf_ns || hf_hr_sig,
            }
        })
        .map(|c| c[0].feature.clone())
        .collect();
    if keep.is_empty() {
        return Err(StatsError::EmptySelection { rule: rule.to_string() });
    }
    Ok(keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textfeat::FeatureRow;

    fn matrix(names: &[&str], data: &[(Subgroup, Vec<f64>)]) -> FeatureMatrix {
        FeatureMatrix {
            names: names.iter().map(|s| s.to_string()).collect(),
            rows: data
                .iter()
                .enumerate()
                .map(|(i, (g, v))| FeatureRow {
                    article_id: format!("a{i}"),
                    subgroup: *g,
                    values: v.clone(),
                })
                .collect(),
        }
    }

    #[test]
    fn buckets_follow_thresholds() {
        let t = Thresholds::default();
        assert_eq!(t.bucket(0.2), Bucket::Ns);
        assert_eq!(t.bucket(0.05), Bucket::Ns);
        assert_eq!(t.bucket(0.049), Bucket::B1);
        assert_eq!(t.bucket(0.005), Bucket::B2);
        assert_eq!(t.bucket(0.0005), Bucket::B3);
        assert_eq!(t.bucket(0.00005), Bucket::B4);
        assert!(Thresholds { b1: 0.01, b2: 0.05, b3: 0.001, b4: 0.0001 }.validate().is_err());
    }

    #[test]
    fn constant_feature_is_all_ns_and_shifted_feature_is_b4() {
        use Subgroup::*;
        let mut data = Vec::new();
        for i in 0..30 {
            let noise = ((i * 37) % 11) as f64 / 10.0 - 0.5;
            data.push((HF, vec![1.0, noise]));
            data.push((MF, vec![1.0, noise + 5.0]));
            data.push((HR, vec![1.0, -noise]));
        }
        let t = significance_table(&matrix(&["flat", "marker"], &data), &Thresholds::default()).unwrap();
        assert_eq!(t.rows().len(), 6);
        assert!(t.rows()[..3].iter().all(|r| r.bucket == Bucket::Ns && r.direction == Direction::None));
        let hf_mf = t.cell("marker", (HF, MF)).unwrap();
        assert_eq!((hf_mf.bucket, hf_mf.direction), (Bucket::B4, Direction::Less));
        let mf_hr = t.cell("marker", (MF, HR)).unwrap();
        assert_eq!((mf_hr.bucket, mf_hr.direction), (Bucket::B4, Direction::Greater));
        assert_eq!(select_debiased_features(&t, DebiasRule::A).unwrap(), ["flat"]);
    }

    #[test]
    fn missing_subgroup_is_error() {
        use Subgroup::*;
        let data = vec![(HF, vec![1.0]), (HF, vec![2.0]), (HR, vec![1.0]), (HR, vec![3.0])];
        assert_eq!(
            significance_table(&matrix(&["x"], &data), &Thresholds::default()).unwrap_err(),
            StatsError::MissingSubgroup("MF".into())
        );
    }

    #[test]
    fn empty_selection_errors() {
        let rows = TABLE_PAIRS
            .iter()
            .map(|p| PairwiseResult {
                feature: "x".into(),
                pair: *p,
                direction: Direction::Less,
                p_value: 1e-9,
                bucket: Bucket::B4,
            })
            .collect();
        let t = SignificanceTable::from_rows(rows, Thresholds::default()).unwrap();
        assert!(matches!(
            select_debiased_features(&t, DebiasRule::A),
            Err(StatsError::EmptySelection { .. })
        ));
        assert_eq!(select_debiased_features(&t, DebiasRule::B).unwrap(), ["x"]);
    }

    #[test]
    fn csv_and_text_render() {
        use Subgroup::*;
        let rows = vec![
            PairwiseResult { feature: "quotes".into(), pair: (HF, MF), direction: Direction::Greater, p_value: 1e-5, bucket: Bucket::B4 },
            PairwiseResult { feature: "quotes".into(), pair: (MF, HR), direction: Direction::Less, p_value: 0.02, bucket: Bucket::B1 },
            PairwiseResult { feature: "quotes".into(), pair: (HF, HR), direction: Direction::None, p_value: 0.7, bucket: Bucket::Ns },
        ];
        let t = SignificanceTable::from_rows(rows, Thresholds::default()).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf, None).unwrap();
        let csv = String::from_utf8(buf).unwrap();
        assert!(csv.starts_with("feature,group_pair,direction,p_value,bucket\nquotes,HF-MF,greater,1e-5,b4\n"));
        let text = t.render_text();
        assert!(text.contains("HF > MF b4"));
        assert!(text.contains("MF < HR b1"));
    }
}
