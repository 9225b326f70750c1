//! Studentized range distribution by numerical integration.
//!
//! For `k` groups and `df` degrees of freedom,
//!
//! ```text
//! P(Q <= q) = ∫_0^∞ f_S(s) W(q s) ds
//! W(w)      = k ∫ φ(z) [Φ(z) - Φ(z - w)]^(k-1) dz
//! ```
//!
//! where `S = sqrt(χ²_df / df)` with density
//! `f_S(s) = df^(df/2) / (Γ(df/2) 2^(df/2 - 1)) s^(df-1) exp(-df s² / 2)`.
//!
//! Quadrature: both integrals use composite 64-point Gauss–Legendre rules.
//! The inner integral runs over `z ∈ [-8, 8]` in 4 panels. The outer
//! integral runs over `s ∈ [max(0, m - 12σ), m + 12σ]` in 6 panels, with
//! `m = sqrt((df - 1) / df)` the mode of `S` and `σ = 1 / sqrt(2 df)`
//! (an upper bound on its spread). For `df > 100_000` the distribution of
//! `S` is treated as a point mass at 1.

use std::sync::OnceLock;

use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

pub const GL_ORDER: usize = 64;
const INNER_PANELS: usize = 4;
const OUTER_PANELS: usize = 6;
const Z_LIMIT: f64 = 8.0;
const S_SPREAD: f64 = 12.0;

/// Nodes and weights of the Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_ORDER))
}

/// Composite Gauss–Legendre integral of `f` over [a, b].
fn integrate(a: f64, b: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = rule();
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let half = h / 2.0;
        let mid = lo + half;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(w) {
            s += wi * f(mid + half * xi);
        }
        total += s * half;
    }
    total
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Distribution of the range of `k` standard normal variables.
pub fn normal_range_cdf(w: f64, k: usize) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let km1 = (k - 1) as i32;
    let v = k as f64
        * integrate(-Z_LIMIT, Z_LIMIT, INNER_PANELS, |z| {
            normal_pdf(z) * (normal_cdf(z) - normal_cdf(z - w)).powi(km1)
        });
    v.clamp(0.0, 1.0)
}

/// `P(Q <= q)` for the studentized range with `k` groups and `df` degrees
/// of freedom.
pub fn studentized_range_cdf(q: f64, k: usize, df: f64) -> f64 {
    assert!(k >= 2, "studentized range needs k >= 2");
    assert!(df >= 1.0, "studentized range needs df >= 1");
    if q.is_nan() {
        return f64::NAN;
    }
    if q <= 0.0 {
        return 0.0;
    }
    if q.is_infinite() {
        return 1.0;
    }
    if df > 100_000.0 {
        return normal_range_cdf(q, k);
    }
    let half = df / 2.0;
    let log_norm = half * df.ln() - ln_gamma(half) - (half - 1.0) * std::f64::consts::LN_2;
    let mode = ((df - 1.0) / df).sqrt();
    let sigma = 1.0 / (2.0 * df).sqrt();
    let lo = (mode - S_SPREAD * sigma).max(0.0);
    let hi = mode + S_SPREAD * sigma;
    let v = integrate(lo, hi, OUTER_PANELS, |s| {
        if s <= 0.0 {
            return 0.0;
        }
        let log_f = log_norm + (df - 1.0) * s.ln() - half * s * s;
        log_f.exp() * normal_range_cdf(q * s, k)
    });
    v.clamp(0.0, 1.0)
}

/// Upper tail `P(Q > q)`.
pub fn studentized_range_sf(q: f64, k: usize, df: f64) -> f64 {
    (1.0 - studentized_range_cdf(q, k, df)).clamp(0.0, 1.0)
}
