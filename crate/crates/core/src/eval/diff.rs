//! Before/after comparison of two evaluation reports.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{EvalError, EvalReport, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Improvement,
    Regression,
    Unchanged,
}

impl Trend {
    pub fn of(difference: f64) -> Self {
        if difference > 0.0 {
            Trend::Improvement
        } else if difference < 0.0 {
            Trend::Regression
        } else {
            Trend::Unchanged
        }
    }

    pub fn arrow(self) -> &'static str {
        match self {
            Trend::Improvement => "↑",
            Trend::Regression => "↓",
            Trend::Unchanged => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffEntry {
    pub metric: String,
    pub before: f64,
    pub after: f64,
    /// Exactly `after - before`.
    pub difference: f64,
    pub trend: Trend,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffReport {
    pub corpus: String,
    pub entries: Vec<DiffEntry>,
}

/// Metric-by-metric differences. Both reports must cover the same corpus
/// and the same subgroup counts.
pub fn diff_reports(before: &EvalReport, after: &EvalReport) -> Result<DiffReport> {
    if before.corpus != after.corpus {
        return Err(EvalError::Incomparable(format!(
            "corpus {} vs {}",
            before.corpus, after.corpus
        )));
    }
    if before.counts != after.counts {
        return Err(EvalError::Incomparable("subgroup counts differ".into()));
    }
    let a = before.metrics();
    let b = after.metrics();
    let names_a: Vec<&String> = a.iter().map(|(n, _)| n).collect();
    let names_b: Vec<&String> = b.iter().map(|(n, _)| n).collect();
    if names_a != names_b {
        return Err(EvalError::Incomparable("metric sets differ".into()));
    }
    let entries = a
        .into_iter()
        .zip(b)
        .map(|((metric, before), (_, after))| {
            let difference = after - before;
            DiffEntry {
                metric,
                before,
                after,
                difference,
                trend: Trend::of(difference),
            }
        })
        .collect();
    Ok(DiffReport {
        corpus: before.corpus.clone(),
        entries,
    })
}

impl DiffReport {
    pub fn get(&self, metric: &str) -> Option<&DiffEntry> {
        self.entries.iter().find(|e| e.metric == metric)
    }

    /// Aligned text table in percent with two decimals.
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<10} {:>8} {:>8} {:>10}", "metric", "before", "after", "difference");
        for e in &self.entries {
            let _ = writeln!(
                s,
                "{:<10} {:>8.2} {:>8.2} {:>+9.2}{}",
                e.metric,
                100.0 * e.before,
                100.0 * e.after,
                100.0 * e.difference,
                e.trend.arrow()
            );
        }
        s
    }

    pub fn write_csv(&self, out: impl std::io::Write, provenance: Option<&str>) -> Result<()> {
        let mut out = out;
        if let Some(p) = provenance {
            writeln!(out, "# {p}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["metric", "before", "after", "difference", "trend"])?;
        for e in &self.entries {
            w.write_record([
                e.metric.clone(),
                e.before.to_string(),
                e.after.to_string(),
                e.difference.to_string(),
                format!("{:?}", e.trend).to_lowercase(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
