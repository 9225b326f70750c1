use fakeaudit::models::{fit_logreg, fit_tree, loss_and_gradient, FitConfig, ModelKind, TrainedModel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRID_X: [f64; 12] = [-2.0, -1.5, -1.0, -0.5, -0.2, 0.1, 0.3, 0.6, 1.0, 1.4, 1.8, 2.2];
const GRID_Y: [u8; 12] = [0, 0, 0, 1, 0, 0, 1, 0, 1, 1, 1, 1];

fn names(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("f{i}")).collect()
}

/// Brute-force minimum of mean BCE over (w, b) ∈ [-10, 10]² with step 0.01
/// on the standardized fixture, computed offline.
const GRID_MIN_LOSS: f64 = 0.401_017_646_778;
const GRID_ARGMIN: (f64, f64) = (2.33, -0.04);

#[test]
fn logreg_matches_grid_minimizer() {
    let x: Vec<Vec<f64>> = GRID_X.iter().map(|v| vec![*v]).collect();
    let cfg = FitConfig { learning_rate: 0.5, epochs: 5000, l2: 0.0, ..FitConfig::default() };
    let m = fit_logreg(&x, &GRID_Y, &names(1), &cfg).unwrap();
    let loss = *m.loss_history.last().unwrap();
    assert!((loss - GRID_MIN_LOSS).abs() < 1e-4, "loss {loss}");
    assert!((m.weights[0] - GRID_ARGMIN.0).abs() < 0.02, "w {}", m.weights[0]);
    assert!((m.bias - GRID_ARGMIN.1).abs() < 0.02, "b {}", m.bias);
}

#[test]
fn gradient_relative_error_over_100_seeds() {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z: Vec<Vec<f64>> = (0..5).map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let y: Vec<u8> = (0..5).map(|_| rng.random_range(0..2u8)).collect();
        let w: Vec<f64> = (0..3).map(|_| rng.random_range(-1.5..1.5)).collect();
        let b = rng.random_range(-1.0..1.0);
        let l2 = rng.random_range(0.0..0.1);
        let (_, gw, gb) = loss_and_gradient(&z, &y, &w, b, l2);
        let f = |w: &[f64], b: f64| loss_and_gradient(&z, &y, w, b, l2).0;
        let mut check = |analytic: f64, fd: f64| {
            let rel = (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1e-3);
            worst = worst.max(rel);
        };
        for j in 0..3 {
            let mut wp = w.clone();
            wp[j] += h;
            let mut wm = w.clone();
            wm[j] -= h;
            check(gw[j], (f(&wp, b) - f(&wm, b)) / (2.0 * h));
        }
        check(gb, (f(&w, b + h) - f(&w, b - h)) / (2.0 * h));
    }
    assert!(worst < 1e-5, "worst relative error {worst}");
}

fn fixtures() -> Vec<(Vec<Vec<f64>>, Vec<u8>)> {
    let mut out = vec![(GRID_X.iter().map(|v| vec![*v]).collect(), GRID_Y.to_vec())];
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let n = 40 + 20 * seed as usize;
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..4).map(|j| rng.random_range(-3.0..3.0) * (j + 1) as f64).collect())
            .collect();
        let y: Vec<u8> = x
            .iter()
            .map(|r| (r[0] - 0.5 * r[2] + rng.random_range(-2.0..2.0) > 0.0) as u8)
            .collect();
        out.push((x, y));
    }
    out
}

#[test]
fn loss_non_increasing_at_default_rate() {
    for (x, y) in fixtures() {
        let k = x[0].len();
        let m = fit_logreg(&x, &y, &names(k), &FitConfig::default()).unwrap();
        assert_eq!(m.loss_history.len(), 501);
        for pair in m.loss_history.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-15, "{} -> {}", pair[0], pair[1]);
        }
    }
}

#[test]
fn tree_xor_depth_two() {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (a, b) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
        for _ in 0..5 {
            x.push(vec![a, b]);
            y.push((a != b) as u8);
        }
    }
    let cfg = FitConfig { max_depth: 2, min_leaf: 5, ..FitConfig::default() };
    let t = fit_tree(&x, &y, &names(2), &cfg).unwrap();
    let acc = x.iter().zip(&y).filter(|(r, yi)| (t.predict_aligned(r) >= 0.5) as u8 == **yi).count();
    assert_eq!(acc, x.len());
    assert!(t.depth() <= 2);
}

#[test]
fn tree_unlimited_depth_fits_consistent_labels() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x: Vec<Vec<f64>> = (0..200).map(|_| (0..3).map(|_| rng.random_range(0..20) as f64).collect()).collect();
    let y: Vec<u8> = x.iter().map(|r| ((r[0] * 7.0 + r[1] * 3.0 + r[2]) as i64 % 3 == 0) as u8).collect();
    let cfg = FitConfig { max_depth: usize::MAX, min_leaf: 1, ..FitConfig::default() };
    let t = fit_tree(&x, &y, &names(3), &cfg).unwrap();
    for (r, yi) in x.iter().zip(&y) {
        assert_eq!(t.predict_aligned(r), *yi as f64);
    }
}

#[test]
fn fitting_is_bit_identical() {
    for (x, y) in fixtures() {
        let k = x[0].len();
        for kind in [ModelKind::Logreg, ModelKind::Tree] {
            let a = TrainedModel::fit(kind, &x, &y, &names(k), &FitConfig::default()).unwrap();
            let b = TrainedModel::fit(kind, &x, &y, &names(k), &FitConfig::default()).unwrap();
            assert_eq!(a, b);
        }
    }
}

fn xy_strategy() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<u8>)> {
    (20usize..60)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(prop::collection::vec(-5i32..5, 2), n),
                prop::collection::vec(0u8..2, n),
            )
        })
        .prop_filter("both classes", |(_, y)| y.contains(&0) && y.contains(&1))
        .prop_map(|(x, y)| (x.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect(), y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Retraining on strictly increasing per-feature transforms gives the
    /// same predictions on every training row. Points strictly inside a
    /// node's split gap can land on either side, since a midpoint does not
    /// map to the midpoint of the transformed values.
    #[test]
    fn tree_invariant_under_monotone_transform((x, y) in xy_strategy()) {
        let cfg = FitConfig { max_depth: 4, min_leaf: 2, ..FitConfig::default() };
        let g = |r: &Vec<f64>| vec![r[0].exp(), 3.0 * r[1] + r[1].powi(3) - 7.0];
        let xt: Vec<Vec<f64>> = x.iter().map(g).collect();
        let a = fit_tree(&x, &y, &names(2), &cfg).unwrap();
        let b = fit_tree(&xt, &y, &names(2), &cfg).unwrap();
        prop_assert_eq!(a.nodes.len(), b.nodes.len());
        for r in &x {
            prop_assert_eq!(a.predict_aligned(r), b.predict_aligned(&g(r)));
        }
    }

    #[test]
    fn logreg_probabilities_in_unit_interval((x, y) in xy_strategy()) {
        let m = fit_logreg(&x, &y, &names(2), &FitConfig { epochs: 50, ..FitConfig::default() }).unwrap();
        for r in &x {
            let p = m.predict_aligned(r);
            prop_assert!(p > 0.0 && p < 1.0);
        }
    }

    #[test]
    fn tree_leaves_are_distributions((x, y) in xy_strategy()) {
        let t = fit_tree(&x, &y, &names(2), &FitConfig { min_leaf: 1, max_depth: 6, ..FitConfig::default() }).unwrap();
        prop_assert!(t.depth() <= 6);
        for node in &t.nodes {
            match node {
                fakeaudit::models::Node::Leaf { p_real, p_fake, .. } => prop_assert!((p_real + p_fake - 1.0).abs() < 1e-12),
                fakeaudit::models::Node::Split { threshold, .. } => prop_assert!(threshold.is_finite()),
            }
        }
    }
}
