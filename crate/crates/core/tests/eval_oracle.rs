use fakeaudit::corpus::{Article, Corpus, Subgroup};
use fakeaudit::eval::{
    aggregate_reports, auroc, cohens_kappa, diff_reports, evaluate, format_cell, EvalReport, MeanStd,
    Prediction, Trend,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fraction of (positive, negative) pairs ranked correctly, ties counting
/// one half.
fn brute_force_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut twice = 0u64;
    let (mut np, mut nn) = (0u64, 0u64);
    for (i, &yi) in labels.iter().enumerate() {
        if yi == 1 {
            np += 1;
        } else {
            nn += 1;
        }
        for (j, &yj) in labels.iter().enumerate() {
            if yi == 1 && yj == 0 {
                twice += match scores[i].partial_cmp(&scores[j]).unwrap() {
                    std::cmp::Ordering::Greater => 2,
                    std::cmp::Ordering::Equal => 1,
                    std::cmp::Ordering::Less => 0,
                };
            }
        }
    }
    twice as f64 / (2 * np * nn) as f64
}

#[test]
fn auroc_equals_pair_counting_on_1000_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    while checked < 1000 {
        let n = rng.random_range(2..=200);
        // coarse grids force many ties
        let levels = rng.random_range(2..50);
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64 / levels as f64).collect();
        let labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        if !labels.contains(&0) || !labels.contains(&1) {
            continue;
        }
        assert_eq!(auroc(&scores, &labels).unwrap(), brute_force_auc(&scores, &labels));
        checked += 1;
    }
}

fn report(corpus: &str, acc: &[(Subgroup, f64)]) -> EvalReport {
    EvalReport {
        corpus: corpus.into(),
        per_subgroup_accuracy: acc.iter().copied().collect(),
        counts: acc.iter().map(|(g, _)| (*g, 100)).collect(),
        overall_accuracy: acc.iter().map(|(_, a)| a).sum::<f64>() / acc.len() as f64,
        f1: 0.5,
        recall: 0.5,
        precision: 0.5,
        auroc: Some(0.5),
        threshold: 0.5,
        seed: None,
        split: None,
    }
}

#[test]
fn diff_reproduces_reference_row() {
    // RoBERTa-Large on GossipCop++, before and after MR augmentation
    let before = report("gossipcop", &[(Subgroup::HF, 0.7797), (Subgroup::MR, 0.2424)]);
    let after = report("gossipcop", &[(Subgroup::HF, 0.8446), (Subgroup::MR, 0.9070)]);
    let d = diff_reports(&before, &after).unwrap();
    let hf = d.get("HF").unwrap();
    let mr = d.get("MR").unwrap();
    assert_eq!(hf.difference, 0.8446 - 0.7797);
    assert_eq!(mr.difference, 0.9070 - 0.2424);
    assert_eq!(format!("{:+.2}", 100.0 * hf.difference), "+6.49");
    assert_eq!(format!("{:+.2}", 100.0 * mr.difference), "+66.46");
    assert_eq!((hf.trend, mr.trend), (Trend::Improvement, Trend::Improvement));
    let text = d.render_text();
    assert!(text.contains("77.97") && text.contains("84.46") && text.contains("+6.49↑"), "{text}");
    assert!(text.contains("+66.46↑"), "{text}");
}

#[test]
fn diff_of_identical_reports_is_zero() {
    let r = report("c", &[(Subgroup::HR, 0.7), (Subgroup::HF, 0.4)]);
    let d = diff_reports(&r, &r).unwrap();
    assert!(d.entries.iter().all(|e| e.difference == 0.0 && e.trend == Trend::Unchanged));
    let other = report("elsewhere", &[(Subgroup::HR, 0.7), (Subgroup::HF, 0.4)]);
    assert!(diff_reports(&r, &other).is_err());
}

#[test]
fn table_row_layout() {
    let stds = [0.002, 0.010, 0.003, 0.002, 0.004, 0.005, 0.006, 0.003];
    let means = [0.7709, 0.4733, 0.9579, 0.7433, 0.7359, 0.7575, 0.7156, 0.7441];
    let cells: Vec<String> = means
        .iter()
        .zip(stds)
        .map(|(m, s)| format_cell(MeanStd { mean: *m, std: s }))
        .collect();
    assert_eq!(
        cells.join("&"),
        "77.09(0.2)&47.33(1.0)&95.79(0.3)&74.33(0.2)&73.59(0.4)&75.75(0.5)&71.56(0.6)&74.41(0.3)"
    );
}

fn corpus_and_preds(rng: &mut ChaCha8Rng) -> (Corpus, Vec<Prediction>) {
    let mut arts = Vec::new();
    let mut preds = Vec::new();
    for (k, g) in Subgroup::ALL.iter().enumerate() {
        let n = rng.random_range(2..15);
        for i in 0..n {
            let id = format!("{g}-{k}-{i}");
            arts.push(Article {
                id: id.clone(),
                title: "t".into(),
                text: "b".into(),
                label: g.label(),
                source: g.source(),
                origin_id: None,
            });
            preds.push(Prediction::from_score(id, rng.random_range(0.0..1.0), 0.5));
        }
    }
    (Corpus::new("rand", arts).unwrap(), preds)
}

#[test]
fn overall_accuracy_is_count_weighted_and_runs_aggregate() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut reports = Vec::new();
    for _ in 0..50 {
        let (c, p) = corpus_and_preds(&mut rng);
        let r = evaluate(&p, &c, 0.5).unwrap();
        let weighted: f64 = r
            .per_subgroup_accuracy
            .iter()
            .map(|(g, a)| a * r.counts[g] as f64)
            .sum::<f64>()
            / r.counts.values().sum::<usize>() as f64;
        assert!((weighted - r.overall_accuracy).abs() < 1e-12);
        for (_, v) in r.metrics() {
            assert!((0.0..=1.0).contains(&v));
        }
        reports.push(r);
    }
    let agg = aggregate_reports(&reports[..3]).unwrap();
    assert_eq!(agg.runs, 3);
    assert_eq!(agg.columns[..4], ["HR", "HF", "MF", "MR"]);
}

#[test]
fn kappa_bounded_over_1000_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..1000 {
        let n = rng.random_range(1..40);
        let cats = rng.random_range(1..6);
        let a: Vec<u8> = (0..n).map(|_| rng.random_range(0..cats)).collect();
        let b: Vec<u8> = (0..n).map(|_| rng.random_range(0..cats)).collect();
        let k = cohens_kappa(&a, &b).unwrap();
        assert!((-1.0..=1.0).contains(&k), "{k}");
        assert_eq!(cohens_kappa(&a, &a).unwrap(), 1.0);
    }
}

proptest! {
    #[test]
    fn auroc_invariant_under_increasing_transform(
        scores in prop::collection::vec(0u32..20, 2..80),
        labels_seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(labels_seed);
        let labels: Vec<u8> = scores.iter().map(|_| rng.random_range(0..2)).collect();
        prop_assume!(labels.contains(&0) && labels.contains(&1));
        let s: Vec<f64> = scores.iter().map(|&v| v as f64 / 20.0).collect();
        let t: Vec<f64> = s.iter().map(|v| (3.0 * v).exp() + v.powi(3)).collect();
        prop_assert_eq!(auroc(&s, &labels).unwrap(), auroc(&t, &labels).unwrap());
    }

    #[test]
    fn diff_is_antisymmetric(a in prop::collection::vec(0.0f64..1.0, 3), b in prop::collection::vec(0.0f64..1.0, 3)) {
        let gs = [Subgroup::HR, Subgroup::HF, Subgroup::MF];
        let ra = report("c", &gs.iter().copied().zip(a).collect::<Vec<_>>());
        let rb = report("c", &gs.iter().copied().zip(b).collect::<Vec<_>>());
        let ab = diff_reports(&ra, &rb).unwrap();
        let ba = diff_reports(&rb, &ra).unwrap();
        for (x, y) in ab.entries.iter().zip(&ba.entries) {
            prop_assert_eq!(x.difference, -y.difference);
        }
    }
}
