//! Aggregation of repeated runs and table rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{EvalError, EvalReport, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
}

/// A percentage cell such as `77.09(0.2)`: mean with two decimals,
/// spread with one. Inputs are fractions.
pub fn format_cell(v: MeanStd) -> String {
    format!("{:.2}({:.1})", 100.0 * v.mean, 100.0 * v.std)
}

/// Mean and spread of each metric over runs on seed-varied splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub columns: Vec<String>,
    pub cells: Vec<MeanStd>,
    pub runs: usize,
}

pub fn aggregate_reports(reports: &[EvalReport]) -> Result<AggregateReport> {
    let first = reports.first().ok_or(EvalError::Empty)?;
    let columns: Vec<String> = first.metrics().into_iter().map(|(n, _)| n).collect();
    let mut values: Vec<Vec<f64>> = vec![Vec::with_capacity(reports.len()); columns.len()];
    for r in reports {
        let m = r.metrics();
        if m.len() != columns.len() || m.iter().zip(&columns).any(|((a, _), b)| a != b) {
            return Err(EvalError::Incomparable("runs report different metrics".into()));
        }
        for (slot, (_, v)) in values.iter_mut().zip(m) {
            slot.push(v);
        }
    }
    let cells = values
        .iter()
        .map(|xs| {
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let std = if xs.len() < 2 {
                0.0
            } else {
                (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            };
            MeanStd { mean, std }
        })
        .collect();
    Ok(AggregateReport {
        columns,
        cells,
        runs: reports.len(),
    })
}

impl AggregateReport {
    pub fn get(&self, column: &str) -> Option<MeanStd> {
        self.columns.iter().position(|c| c == column).map(|i| self.cells[i])
    }

    /// Cells joined by `sep`, e.g. `77.09(0.2)&47.33(1.0)&...`.
    pub fn row(&self, sep: &str) -> String {
        self.cells.iter().map(|c| format_cell(*c)).collect::<Vec<_>>().join(sep)
    }
}

/// Aligned text table with one labelled row per model.
pub fn render_table(rows: &[(String, AggregateReport)]) -> String {
    let Some((_, first)) = rows.first() else {
        return String::new();
    };
    let label_w = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(5).max(5);
    let mut s = String::new();
    let _ = write!(s, "{:<label_w$}", "model");
    for c in &first.columns {
        let _ = write!(s, "  {c:>12}");
    }
    s.push('\n');
    for (label, r) in rows {
        let _ = write!(s, "{label:<label_w$}");
        for c in &r.cells {
            let _ = write!(s, "  {:>12}", format_cell(*c));
        }
        s.push('\n');
    }
    s
}
