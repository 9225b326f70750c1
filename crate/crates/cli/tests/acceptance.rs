//! Acceptance checks, one line per criterion. Exits nonzero if any fails.
//!
//! Criteria 5, 6, 8 and 10 drive the `fakeaudit` binary; the rest call the
//! library directly.

mod common;

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use fakeaudit::corpus::Subgroup;
use fakeaudit::eval::{auroc, cohens_kappa, diff_reports, EvalReport, Trend};
use fakeaudit::mauve::{mauve_score, EmbeddingSet, MauveConfig};
use fakeaudit::models::{fit_logreg, loss_and_gradient, FitConfig};
use fakeaudit::stats::{studentized_range_cdf, tukey_hsd, GroupSamples};
use fakeaudit::synthetic::SyntheticSpec;
use fakeaudit::textfeat::{extract_text_features, FeatureSchema, LexiconSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

// ---- 1. readability formulas ----------------------------------------------

const FORMULA_TOL: f64 = 1e-2;
const CL_EXPECTED: f64 = -8.03;
const SMOG_EXPECTED: f64 = 7.169;

fn formulas() -> Outcome {
    let start = Instant::now();
    let lex = LexiconSet::builtin();
    let schema = FeatureSchema::canonical();
    let get = |v: &[f64], name: &str| v[schema.index_of(name).unwrap()];

    let cl = get(&extract_text_features("The cat sat. The dog ran.", &lex).map_err(|e| e.to_string())?, "coleman_liau_index");
    // 30 sentences, 15 with one three-syllable word
    let smog_text: String = (0..30)
        .map(|i| if i % 2 == 0 { "Bob saw a beautiful dog. " } else { "Bob saw a dog. " })
        .collect();
    let smog = get(&extract_text_features(&smog_text, &lex).map_err(|e| e.to_string())?, "smog_index");
    let elapsed = start.elapsed();

    ensure!((cl - CL_EXPECTED).abs() < FORMULA_TOL, "coleman_liau {cl} vs {CL_EXPECTED}");
    ensure!((smog - SMOG_EXPECTED).abs() < FORMULA_TOL, "smog {smog} vs {SMOG_EXPECTED}");
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("coleman_liau {cl:.4}, smog {smog:.4}, {elapsed:.2?}"))
}

// ---- 2. Tukey HSD --------------------------------------------------------

const TUKEY_TOL: f64 = 1e-3;

/// p-values for pairs (0,1), (0,2), (1,2) from an independent reference
/// implementation, computed before the build (same values as the core
/// oracle tests).
const TUKEY_FIXTURES: &[(&[&[f64]], [f64; 3])] = &[
    (
        &[&[24.5, 23.5, 26.4, 27.1, 29.9], &[28.4, 34.2, 29.5, 32.2, 30.1], &[26.1, 28.3, 24.3, 26.2, 27.8]],
        [0.014_448_326_736, 0.980_310_724_094, 0.020_331_136_740],
    ),
    (
        &[&[1.2, 0.8, 1.1, 0.9, 1.0], &[1.4, 1.6, 1.3, 1.7, 1.5], &[1.0, 1.3, 0.9, 1.2, 1.1]],
        [0.000_834_214_637, 0.590_770_608_320, 0.004_634_080_572],
    ),
    (
        &[&[5.0, 7.0, 6.0, 8.0, 9.0], &[5.5, 6.5, 7.5, 6.0, 8.5], &[12.0, 10.0, 11.0, 13.0, 9.5]],
        [0.972_874_733_361, 0.001_679_605_336, 0.001_150_058_563],
    ),
];

/// Tabulated 5% critical value of the studentized range, k = 3, df = 10.
const Q_CRIT_3_10: f64 = 3.877;

fn tukey() -> Outcome {
    let mut worst: f64 = 0.0;
    for (groups, expected) in TUKEY_FIXTURES {
        let samples =
            GroupSamples::new(groups.iter().enumerate().map(|(i, g)| (i, g.to_vec())).collect()).map_err(|e| e.to_string())?;
        let got = tukey_hsd(&samples);
        ensure!(got.len() == 3, "expected 3 pairs, got {}", got.len());
        for (g, e) in got.iter().zip(expected) {
            worst = worst.max((g.p_value - e).abs());
        }
    }
    let cdf = studentized_range_cdf(Q_CRIT_3_10, 3, 10.0);
    ensure!(worst < TUKEY_TOL, "max p-value error {worst:.2e}");
    ensure!((cdf - 0.95).abs() < TUKEY_TOL, "cdf at critical value {cdf}");
    Ok(format!("max p-value error {worst:.1e}, cdf(3.877; 3, 10) = {cdf:.5}"))
}

// ---- 3. logistic-regression gradient --------------------------------------

const GRAD_TOL: f64 = 1e-5;

fn gradient() -> Outcome {
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
            worst = worst.max((analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1e-3));
        };
        for j in 0..3 {
            let (mut wp, mut wm) = (w.clone(), w.clone());
            wp[j] += h;
            wm[j] -= h;
            check(gw[j], (f(&wp, b) - f(&wm, b)) / (2.0 * h));
        }
        check(gb, (f(&w, b + h) - f(&w, b - h)) / (2.0 * h));
    }
    ensure!(worst < GRAD_TOL, "max relative error {worst:.2e}");

    let mut fixtures: Vec<(Vec<Vec<f64>>, Vec<u8>)> = vec![(
        [-2.0, -1.5, -1.0, -0.5, -0.2, 0.1, 0.3, 0.6, 1.0, 1.4, 1.8, 2.2].iter().map(|v| vec![*v]).collect(),
        vec![0, 0, 0, 1, 0, 0, 1, 0, 1, 1, 1, 1],
    )];
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let n = 40 + 20 * seed as usize;
        let x: Vec<Vec<f64>> =
            (0..n).map(|_| (0..4).map(|j| rng.random_range(-3.0..3.0) * (j + 1) as f64).collect()).collect();
        let y = x.iter().map(|r| (r[0] - 0.5 * r[2] + rng.random_range(-2.0..2.0) > 0.0) as u8).collect();
        fixtures.push((x, y));
    }
    let mut epochs = 0;
    for (i, (x, y)) in fixtures.iter().enumerate() {
        let names: Vec<String> = (0..x[0].len()).map(|j| format!("f{j}")).collect();
        let m = fit_logreg(x, y, &names, &FitConfig::default()).map_err(|e| e.to_string())?;
        if let Some(w) = m.loss_history.windows(2).find(|w| w[1] > w[0]) {
            return Err(format!("fixture {i}: loss rose {} -> {}", w[0], w[1]));
        }
        epochs += m.loss_history.len() - 1;
    }
    Ok(format!("max relative error {worst:.1e}; loss non-increasing over {epochs} epochs on {} fixtures", fixtures.len()))
}

// ---- 4. AUROC -----------------------------------------------------------

fn brute_force_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let (mut twice, mut np, mut nn) = (0u64, 0u64, 0u64);
    for (i, &yi) in labels.iter().enumerate() {
        if yi == 1 { np += 1 } else { nn += 1 }
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

fn auroc_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut checked, mut with_ties) = (0, 0);
    while checked < 1000 {
        let n = rng.random_range(2..=200);
        let levels = rng.random_range(2..60);
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64 / levels as f64).collect();
        let labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        if !labels.contains(&0) || !labels.contains(&1) {
            continue;
        }
        let got = auroc(&scores, &labels).map_err(|e| e.to_string())?;
        let want = brute_force_auc(&scores, &labels);
        ensure!(got == want, "instance {checked} (n={n}): {got} vs {want}");
        if n > levels {
            with_ties += 1;
        }
        checked += 1;
    }
    Ok(format!("{checked} instances exact, {with_ties} with forced ties"))
}

// ---- 5, 6, 10. end-to-end pipeline ----------------------------------------

const BIAS_GAP_POINTS: f64 = 20.0;
const MR_GAIN_POINTS: f64 = 20.0;
const HF_MAX_DROP_POINTS: f64 = 5.0;
const PIPELINE_BUDGET: Duration = Duration::from_secs(60);

struct Workspace {
    _dir: tempfile::TempDir,
    config: std::path::PathBuf,
    root: std::path::PathBuf,
    _server: MockServer,
}

/// A 2,000-article synthetic corpus (MF and MR carry stylistic markers),
/// embedding and annotation files, and a config wiring them together.
fn workspace() -> Workspace {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    write_synthetic(&root.join("synthetic.jsonl"), &SyntheticSpec::default());

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut p = String::from("id,x0,x1,x2,x3\n");
    let mut q = p.clone();
    for i in 0..80 {
        let v: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        p.push_str(&format!("e{i},{},{},{},{}\n", v[0], v[1], v[2], v[3]));
        q.push_str(&format!("e{i},{},{},{},{}\n", v[0] + 0.3, v[1], v[2] * 0.9, v[3]));
    }
    fs::write(root.join("p.csv"), p).unwrap();
    fs::write(root.join("q.csv"), q).unwrap();
    fs::write(root.join("rater_a.csv"), "id,fluency,consistency\n1,5,4\n2,4,4\n3,3,2\n4,5,5\n5,2,3\n").unwrap();
    fs::write(root.join("rater_b.csv"), "id,fluency,consistency\n1,5,4\n2,3,4\n3,3,2\n4,5,4\n5,2,3\n").unwrap();

    let server = mock_server(200, &mock_article());
    let config = write_config(
        &root,
        &format!(
            r#"seed = 7
out_dir = "out"

[corpus]
paths = ["synthetic.jsonl"]

[models]
kinds = ["logreg", "tree"]

[generate]
limit = 4

[llm]
base_url = "{}"
api_key_env = "{KEY_ENV}"
requests_per_minute = 6000

[mauve]
p = "p.csv"
q = "q.csv"
num_clusters = 8

[kappa]
a = "rater_a.csv"
b = "rater_b.csv"
original = "p.csv"
generated = "q.csv"
"#,
            server.base_url
        ),
    );
    Workspace { _dir: dir, config, root, _server: server }
}

const PIPELINE: &[&str] = &["ingest", "augment", "extract", "audit", "train", "eval", "compare"];
const EXTRA: &[&str] = &["generate", "mauve", "kappa"];

fn run_all(ws: &Workspace, out: &Path, commands: &[&str]) -> Result<(), String> {
    for cmd in commands {
        let o = fakeaudit(&["--config", s(&ws.config), "--out", s(out), cmd]);
        if !o.status.success() {
            return Err(format!("`{cmd}` exited {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr).trim()));
        }
    }
    Ok(())
}

fn pct(report: &Path, g: &str) -> f64 {
    100.0 * accuracy(report, g)
}

fn bias(ws: &Workspace, elapsed: Duration) -> Outcome {
    let reports = ws.root.join("run1/reports");
    let (base, deb) = (reports.join("logreg-baseline.json"), reports.join("logreg-debiased.json"));
    let (hf0, mf0) = (pct(&base, "HF"), pct(&base, "MF"));
    let (hf1, mf1) = (pct(&deb, "HF"), pct(&deb, "MF"));
    ensure!(mf0 - hf0 >= BIAS_GAP_POINTS, "baseline MF {mf0:.2} vs HF {hf0:.2}");
    ensure!(mf1 < mf0, "debiasing did not lower MF ({mf0:.2} -> {mf1:.2})");
    ensure!(hf1 > hf0, "debiasing did not raise HF ({hf0:.2} -> {hf1:.2})");
    ensure!(elapsed < PIPELINE_BUDGET, "pipeline took {elapsed:?}");
    Ok(format!(
        "baseline MF {mf0:.2} vs HF {hf0:.2}; debiased MF {mf1:.2}, HF {hf1:.2}; pipeline {elapsed:.2?}"
    ))
}

fn augmentation(ws: &Workspace) -> Outcome {
    let reports = ws.root.join("run1/reports");
    let (base, aug) = (reports.join("logreg-baseline.json"), reports.join("logreg-augmented.json"));
    let (mr0, hf0) = (pct(&base, "MR"), pct(&base, "HF"));
    let (mr1, hf1) = (pct(&aug, "MR"), pct(&aug, "HF"));
    ensure!(mr1 - mr0 >= MR_GAIN_POINTS, "MR {mr0:.2} -> {mr1:.2}");
    ensure!(hf1 - hf0 >= -HF_MAX_DROP_POINTS, "HF {hf0:.2} -> {hf1:.2}");
    Ok(format!("MR {mr0:.2} -> {mr1:.2} ({:+.2}), HF {hf0:.2} -> {hf1:.2} ({:+.2})", mr1 - mr0, hf1 - hf0))
}

fn determinism(ws: &Workspace) -> Outcome {
    run_all(ws, &ws.root.join("run1"), EXTRA)?;
    run_all(ws, &ws.root.join("run2"), PIPELINE)?;
    run_all(ws, &ws.root.join("run2"), EXTRA)?;
    let a = snapshot(&ws.root.join("run1"));
    let b = snapshot(&ws.root.join("run2"));
    let missing: Vec<_> = a.keys().filter(|k| !b.contains_key(*k)).chain(b.keys().filter(|k| !a.contains_key(*k))).collect();
    ensure!(missing.is_empty(), "file sets differ: {missing:?}");
    let differing: Vec<_> = a.iter().filter(|(k, v)| b[*k] != **v).map(|(k, _)| k).collect();
    ensure!(differing.is_empty(), "differing artifacts: {differing:?}");
    ensure!(a.len() > 20, "only {} artifacts", a.len());
    Ok(format!("{} artifacts from {} commands byte-identical across runs", a.len(), PIPELINE.len() + EXTRA.len()))
}

// ---- 7. MAUVE -------------------------------------------------------------

const MAUVE_SELF_MIN: f64 = 0.95;
const MAUVE_FAR_MAX: f64 = 0.05;
const MAUVE_SYM_TOL: f64 = 1e-6;

fn gaussian_cloud(rng: &mut ChaCha8Rng, n: usize, d: usize, shift: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            (0..d)
                .map(|j| {
                    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
                    let u2: f64 = rng.random_range(0.0..1.0);
                    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos() + if j == 0 { shift } else { 0.0 }
                })
                .collect()
        })
        .collect()
}

fn mauve() -> Outcome {
    let cfg = MauveConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = EmbeddingSet::from_vectors(gaussian_cloud(&mut rng, 500, 16, 0.0)).map_err(|e| e.to_string())?;
    let q = EmbeddingSet::from_vectors(gaussian_cloud(&mut rng, 500, 16, 20.0)).map_err(|e| e.to_string())?;
    let same = mauve_score(&p, &p.clone(), &cfg).map_err(|e| e.to_string())?.score;
    let pq = mauve_score(&p, &q, &cfg).map_err(|e| e.to_string())?.score;
    let qp = mauve_score(&q, &p, &cfg).map_err(|e| e.to_string())?.score;
    ensure!(same >= MAUVE_SELF_MIN, "identical sets scored {same}");
    ensure!(pq <= MAUVE_FAR_MAX, "separated clouds scored {pq}");
    ensure!((pq - qp).abs() < MAUVE_SYM_TOL, "asymmetry {:.2e}", (pq - qp).abs());
    Ok(format!("identical {same:.4}, separated {pq:.2e}, asymmetry {:.1e}", (pq - qp).abs()))
}

// ---- 8. before/after difference --------------------------------------------

fn report(acc: &[(Subgroup, f64)]) -> EvalReport {
    EvalReport {
        corpus: "gossipcop++".into(),
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

fn diff_anchor() -> Outcome {
    // RoBERTa-Large on GossipCop++, before and after MR augmentation
    let before = report(&[(Subgroup::HF, 0.7797), (Subgroup::MR, 0.2424)]);
    let after = report(&[(Subgroup::HF, 0.8446), (Subgroup::MR, 0.9070)]);
    let d = diff_reports(&before, &after).map_err(|e| e.to_string())?;
    let hf = d.get("HF").ok_or("no HF row")?;
    let mr = d.get("MR").ok_or("no MR row")?;
    let (hf_s, mr_s) = (format!("{:+.2}", 100.0 * hf.difference), format!("{:+.2}", 100.0 * mr.difference));
    ensure!(hf_s == "+6.49" && mr_s == "+66.46", "HF {hf_s}, MR {mr_s}");
    ensure!(hf.trend == Trend::Improvement && mr.trend == Trend::Improvement, "trends {:?} {:?}", hf.trend, mr.trend);

    // same values through `fakeaudit compare`
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let stamp = |name: &str, r: &EvalReport| {
        let p = dir.path().join(name);
        let doc = serde_json::json!({"provenance": "reference values", "data": r});
        fs::write(&p, doc.to_string()).unwrap();
        p
    };
    let (b, a) = (stamp("before.json", &before), stamp("after.json", &after));
    let out = dir.path().join("out");
    let o = fakeaudit(&["--out", s(&out), "compare", "--before", s(&b), "--after", s(&a)]);
    ensure!(o.status.success(), "compare failed: {}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("compare/before-vs-after.txt")).map_err(|e| e.to_string())?;
    ensure!(text.contains("+6.49") && text.contains("+66.46"), "compare output:\n{text}");
    Ok(format!("HF 77.97 -> 84.46 = {hf_s}, MR 24.24 -> 90.70 = {mr_s} (library and CLI)"))
}

// ---- 9. Cohen's kappa -----------------------------------------------------

fn kappa() -> Outcome {
    let k = |a: &[u8], b: &[u8]| cohens_kappa(a, b).map_err(|e| e.to_string());
    let half = k(&[1, 1, 0, 0], &[1, 0, 0, 0])?;
    ensure!(half == 0.5, "fixture gave {half}");
    ensure!(k(&[3, 1, 2, 2, 5], &[3, 1, 2, 2, 5])? == 1.0, "identity is not 1");
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..1000 {
        let n = rng.random_range(1..60);
        let cats = rng.random_range(1..6);
        let a: Vec<u8> = (0..n).map(|_| rng.random_range(0..cats)).collect();
        let b: Vec<u8> = (0..n).map(|_| rng.random_range(0..cats)).collect();
        let v = k(&a, &b)?;
        ensure!((-1.0..=1.0).contains(&v), "kappa {v} out of range");
        ensure!(k(&a, &a)? == 1.0, "identity failed on {a:?}");
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok(format!("fixture 0.5 exact, identity 1.0, 1000 random pairs in [{lo:.3}, {hi:.3}]"))
}

// ---------------------------------------------------------------------------

fn guarded<T>(f: impl FnOnce() -> Result<T, String>) -> Result<T, String> {
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(e) => Err(e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into())),
    }
}

fn main() -> ExitCode {
    panic::set_hook(Box::new(|_| {}));
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "readability formulas", guarded(formulas)),
        (2, "Tukey HSD p-values and studentized range", guarded(tukey)),
        (3, "logistic-regression gradient and monotone loss", guarded(gradient)),
        (4, "AUROC equals pair counting", guarded(auroc_oracle)),
    ];

    let ws = match guarded(|| Ok(workspace())) {
        Ok(ws) => Some(ws),
        Err(e) => {
            eprintln!("workspace setup failed: {e}");
            None
        }
    };
    let pipeline = ws.as_ref().map(|ws| {
        let start = Instant::now();
        run_all(ws, &ws.root.join("run1"), PIPELINE).map(|()| start.elapsed())
    });
    let from_pipeline = |f: &dyn Fn(&Workspace, Duration) -> Outcome| match (&ws, &pipeline) {
        (Some(ws), Some(Ok(t))) => guarded(|| f(ws, *t)),
        (_, Some(Err(e))) => Err(e.clone()),
        _ => Err("workspace setup failed".into()),
    };
    results.push((5, "synthetic bias and Rule A debiasing", from_pipeline(&bias)));
    results.push((6, "MR augmentation", from_pipeline(&|ws, _| augmentation(ws))));
    results.push((7, "MAUVE properties", guarded(mauve)));
    results.push((8, "before/after difference anchor", guarded(diff_anchor)));
    results.push((9, "Cohen's kappa", guarded(kappa)));
    results.push((10, "determinism across commands", from_pipeline(&|ws, _| determinism(ws))));

    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (n, name, r) in &results {
        match r {
            Ok(detail) => println!("[PASS] {n:>2} {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {n:>2} {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
