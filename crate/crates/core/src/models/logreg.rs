//! Binary logistic regression trained by full-batch gradient descent.
//!
//! Objective over standardized features `z`:
//!
//! ```text
//! L(w, b) = mean_i [ softplus(w·z_i + b) - y_i (w·z_i + b) ] + (l2 / 2) ‖w‖²
//! ```
//!
//! which is the mean binary cross-entropy plus an L2 penalty on the weights
//! (the bias is not penalized). Weights start at zero, so fitting is
//! deterministic.

use serde::{Deserialize, Serialize};

use super::{check_training_data, FitConfig, ModelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub feature_subset: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub standardization: Vec<Standardization>,
    /// Constant training features removed before fitting.
    pub dropped_features: Vec<String>,
    pub l2: f64,
    pub seed: u64,
    /// Objective before the first step and after every epoch.
    pub loss_history: Vec<f64>,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Objective value and gradient `(loss, dL/dw, dL/db)` at `(w, b)`.
pub fn loss_and_gradient(z: &[Vec<f64>], y: &[u8], w: &[f64], b: f64, l2: f64) -> (f64, Vec<f64>, f64) {
    let n = z.len() as f64;
    let mut loss = 0.0;
    let mut gw = vec![0.0; w.len()];
    let mut gb = 0.0;
    for (row, &yi) in z.iter().zip(y) {
        let s: f64 = row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b;
        let yi = yi as f64;
        loss += softplus(s) - yi * s;
        let r = sigmoid(s) - yi;
        for (g, x) in gw.iter_mut().zip(row) {
            *g += r * x;
        }
        gb += r;
    }
    loss /= n;
    gb /= n;
    for (g, wi) in gw.iter_mut().zip(w) {
        *g = *g / n + l2 * wi;
    }
    loss += 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
    (loss, gw, gb)
}

/// Per-column mean and population standard deviation.
fn column_stats(x: &[Vec<f64>], col: usize) -> Standardization {
    let n = x.len() as f64;
    let mean = x.iter().map(|r| r[col]).sum::<f64>() / n;
    let var = x.iter().map(|r| (r[col] - mean).powi(2)).sum::<f64>() / n;
    Standardization { mean, std: var.sqrt() }
}

/// Fits on rows `x` whose columns are named by `names`.
pub fn fit_logreg(x: &[Vec<f64>], y: &[u8], names: &[String], cfg: &FitConfig) -> Result<LogRegModel> {
    cfg.validate()?;
    check_training_data(x, y, names.len())?;

    let mut kept = Vec::new();
    let mut stats = Vec::new();
    let mut dropped = Vec::new();
    for (j, name) in names.iter().enumerate() {
        let s = column_stats(x, j);
        if s.std <= 1e-12 * s.mean.abs().max(1.0) {
            dropped.push(name.clone());
        } else {
            kept.push(j);
            stats.push(s);
        }
    }
    if !dropped.is_empty() {
        log::warn!("dropping constant features before fitting: {}", dropped.join(", "));
    }
    if kept.is_empty() {
        return Err(ModelError::NoUsableFeatures);
    }
    let z: Vec<Vec<f64>> = x
        .iter()
        .map(|r| kept.iter().zip(&stats).map(|(&j, s)| (r[j] - s.mean) / s.std).collect())
        .collect();

    let mut w = vec![0.0; kept.len()];
    let mut b = 0.0;
    let mut history = Vec::with_capacity(cfg.epochs + 1);
    for _ in 0..cfg.epochs {
        let (loss, gw, gb) = loss_and_gradient(&z, y, &w, b, cfg.l2);
        history.push(loss);
        for (wi, g) in w.iter_mut().zip(&gw) {
            *wi -= cfg.learning_rate * g;
        }
        b -= cfg.learning_rate * gb;
    }
    history.push(loss_and_gradient(&z, y, &w, b, cfg.l2).0);

    Ok(LogRegModel {
        feature_subset: kept.iter().map(|&j| names[j].clone()).collect(),
        weights: w,
        bias: b,
        standardization: stats,
        dropped_features: dropped,
        l2: cfg.l2,
        seed: cfg.seed,
        loss_history: history,
    })
}

impl LogRegModel {
    /// Probability of fake for a row aligned to `feature_subset`.
    pub fn predict_aligned(&self, row: &[f64]) -> f64 {
        let s: f64 = row
            .iter()
            .zip(&self.standardization)
            .zip(&self.weights)
            .map(|((x, st), w)| w * (x - st.mean) / st.std)
            .sum::<f64>()
            + self.bias;
        sigmoid(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hand_sigmoid() {
        let m = LogRegModel {
            feature_subset: vec!["f".into()],
            weights: vec![2.0],
            bias: -1.0,
            standardization: vec![Standardization { mean: 0.0, std: 1.0 }],
            dropped_features: vec![],
            l2: 0.0,
            seed: 0,
            loss_history: vec![],
        };
        assert_abs_diff_eq!(m.predict_aligned(&[1.0]), 0.731_058_578_6, epsilon = 1e-9);
        let zero = LogRegModel { weights: vec![0.0], bias: 0.0, ..m.clone() };
        assert_eq!(zero.predict_aligned(&[123.0]), 0.5);
        let unit = LogRegModel { weights: vec![1.0], bias: 0.0, ..m };
        assert_eq!(unit.predict_aligned(&[0.0]), 0.5);
    }

    #[test]
    fn separable_one_feature() {
        let x: Vec<Vec<f64>> = [-1.0, -1.0, 1.0, 1.0, -1.0, 1.0].iter().map(|v| vec![*v]).collect();
        let y: Vec<u8> = x.iter().map(|r| (r[0] > 0.0) as u8).collect();
        let m = fit_logreg(&x, &y, &["x".into()], &FitConfig::default()).unwrap();
        assert!(m.weights[0] > 0.0);
        for (r, yi) in x.iter().zip(&y) {
            assert_eq!((m.predict_aligned(r) >= 0.5) as u8, *yi);
        }
    }

    #[test]
    fn constant_feature_dropped() {
        let x = vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 2.0], vec![1.0, 3.0]];
        let y = vec![0, 0, 1, 1];
        let m = fit_logreg(&x, &y, &["c".into(), "v".into()], &FitConfig::default()).unwrap();
        assert_eq!(m.feature_subset, ["v"]);
        assert_eq!(m.dropped_features, ["c"]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let z = vec![vec![0.3, -1.2], vec![1.5, 0.4], vec![-0.7, 0.9]];
        let y = vec![1, 0, 1];
        let w = vec![0.4, -0.3];
        let b = 0.1;
        let (_, gw, gb) = loss_and_gradient(&z, &y, &w, b, 0.01);
        let h = 1e-5;
        for j in 0..2 {
            let mut wp = w.clone();
            wp[j] += h;
            let mut wm = w.clone();
            wm[j] -= h;
            let fd = (loss_and_gradient(&z, &y, &wp, b, 0.01).0 - loss_and_gradient(&z, &y, &wm, b, 0.01).0) / (2.0 * h);
            assert_abs_diff_eq!(gw[j], fd, epsilon = 1e-9);
        }
        let fd = (loss_and_gradient(&z, &y, &w, b + h, 0.01).0 - loss_and_gradient(&z, &y, &w, b - h, 0.01).0) / (2.0 * h);
        assert_abs_diff_eq!(gb, fd, epsilon = 1e-9);
    }
}
