//! Distribution similarity between two embedded text collections.
//!
//! Both sets are quantized by one joint k-means clustering. Smoothed
//! cluster histograms `p` and `q` are then compared through their mixtures
//! `r = λp + (1-λ)q`: each `λ` on the grid gives the frontier point
//! `(exp(-c·KL(q‖r)), exp(-c·KL(p‖r)))`. The score is the trapezoid area
//! under the frontier closed by the corner points `(0, 1)` and `(1, 0)`.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum MauveError {
    #[error("embedding set needs at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("row {row} has {got} values, expected {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },
    #[error("row {0} contains a non-finite value")]
    NonFinite(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("k = {k} exceeds the number of points ({n})")]
    TooManyClusters { k: usize, n: usize },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = MauveError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    ids: Vec<String>,
    vectors: Vec<Vec<f64>>,
}

impl EmbeddingSet {
    pub fn new(ids: Vec<String>, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if vectors.len() < 2 {
            return Err(MauveError::TooFewRows(vectors.len()));
        }
        if ids.len() != vectors.len() {
            return Err(MauveError::InvalidConfig(format!(
                "{} ids for {} vectors",
                ids.len(),
                vectors.len()
            )));
        }
        let d = vectors[0].len();
        for (row, v) in vectors.iter().enumerate() {
            if v.len() != d || d == 0 {
                return Err(MauveError::RaggedRow { row, got: v.len(), expected: d });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(MauveError::NonFinite(row));
            }
        }
        Ok(EmbeddingSet { ids, vectors })
    }

    pub fn from_vectors(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let ids = (0..vectors.len()).map(|i| i.to_string()).collect();
        Self::new(ids, vectors)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.ids.iter().position(|x| x == id).map(|i| self.vectors[i].as_slice())
    }

    /// CSV rows of `id,v1,v2,...`. A first row whose second field is not a
    /// number is treated as a header; `#` lines are comments.
    pub fn read_csv(input: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .flexible(true)
            .from_reader(input);
        let mut ids = Vec::new();
        let mut vectors = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(i + 1);
            if rec.len() < 2 {
                return Err(MauveError::Parse { line, message: "need an id and at least one value".into() });
            }
            if i == 0 && rec[1].trim().parse::<f64>().is_err() {
                continue;
            }
            let v = rec
                .iter()
                .skip(1)
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|e| MauveError::Parse { line, message: e.to_string() })?;
            ids.push(rec[0].to_string());
            vectors.push(v);
        }
        Self::new(ids, vectors)
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for (id, v) in self.ids.iter().zip(&self.vectors) {
            let mut rec = vec![id.clone()];
            rec.extend(v.iter().map(|x| x.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MauveConfig {
    /// `None` picks `max(2, ⌊(n_P + n_Q) / 10⌋)`.
    pub num_clusters: Option<usize>,
    pub scaling_constant: f64,
    pub grid_size: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub kmeans_restarts: usize,
    pub kmeans_max_iter: usize,
}

impl Default for MauveConfig {
    fn default() -> Self {
        MauveConfig {
            num_clusters: None,
            scaling_constant: 5.0,
            grid_size: 25,
            seed: 0,
            epsilon: 1e-8,
            kmeans_restarts: 5,
            kmeans_max_iter: 300,
        }
    }
}

impl MauveConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(MauveError::InvalidConfig(m.into()));
        if self.num_clusters == Some(0) {
            return bad("num_clusters must be positive");
        }
        if !(self.scaling_constant > 0.0 && self.scaling_constant.is_finite()) {
            return bad("scaling_constant must be > 0");
        }
        if self.grid_size < 3 {
            return bad("grid_size must be at least 3");
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be > 0");
        }
        if self.kmeans_restarts == 0 || self.kmeans_max_iter == 0 {
            return bad("k-means restarts and iterations must be positive");
        }
        Ok(())
    }

    pub fn clusters_for(&self, n: usize) -> usize {
        self.num_clusters.unwrap_or_else(|| (n / 10).max(2))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub inertia: f64,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = dist2(p, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_seed(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centers = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random_range(0.0..total);
            let mut pick = n - 1;
            for (i, d) in d2.iter().enumerate() {
                if target < *d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centers.push(points[next].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(dist2(p, centers.last().unwrap()));
        }
    }
    centers
}

fn lloyd(points: &[Vec<f64>], mut centers: Vec<Vec<f64>>, max_iter: usize) -> KMeansResult {
    let k = centers.len();
    let dim = points[0].len();
    let mut assignments = vec![usize::MAX; points.len()];
    for _ in 0..max_iter {
        let mut changed = false;
        for (a, p) in assignments.iter_mut().zip(points) {
            let (c, _) = nearest(p, &centers);
            if *a != c {
                *a = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (&a, p) in assignments.iter().zip(points) {
            counts[a] += 1;
            for (s, x) in sums[a].iter_mut().zip(p) {
                *s += x;
            }
        }
        for c in 0..k {
            // an emptied cluster keeps its previous center
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }
    let inertia = points.iter().zip(&assignments).map(|(p, &a)| dist2(p, &centers[a])).sum();
    KMeansResult { assignments, centers, inertia }
}

/// Lloyd's algorithm from k-means++ seeds, best of `restarts` runs by
/// inertia (earliest restart wins ties).
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, restarts: usize, max_iter: usize) -> Result<KMeansResult> {
    let n = points.len();
    if k == 0 {
        return Err(MauveError::InvalidConfig("k must be positive".into()));
    }
    if k > n {
        return Err(MauveError::TooManyClusters { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansResult> = None;
    for _ in 0..restarts.max(1) {
        let run = lloyd(points, plus_plus_seed(points, k, &mut rng), max_iter);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontierPoint {
    pub lambda: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MauveResult {
    pub score: f64,
    pub num_clusters: usize,
    pub p_hist: Vec<f64>,
    pub q_hist: Vec<f64>,
    /// One point per grid value of λ, in grid order.
    pub frontier: Vec<FrontierPoint>,
}

impl MauveResult {
    pub fn write_frontier_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["lambda", "x", "y"])?;
        for p in &self.frontier {
            w.write_record([p.lambda.to_string(), p.x.to_string(), p.y.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn kl(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .filter(|(x, _)| **x > 0.0)
        .map(|(x, y)| x * (x / y).ln())
        .sum::<f64>()
        .max(0.0)
}

/// Evenly spaced λ values from `1e-6` to `1 - 1e-6`, mirrored about 1/2.
pub fn lambda_grid(size: usize) -> Vec<f64> {
    let (lo, hi) = (1e-6, 1.0 - 1e-6);
    let mut g: Vec<f64> = (0..size).map(|i| lo + (hi - lo) * i as f64 / (size - 1) as f64).collect();
    for i in 0..size / 2 {
        g[size - 1 - i] = 1.0 - g[i];
    }
    if size % 2 == 1 {
        g[size / 2] = 0.5;
    }
    g
}

fn frontier_area(points: &[FrontierPoint]) -> f64 {
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(points.len() + 2);
    pts.push((0.0, 1.0));
    pts.extend(points.iter().map(|p| (p.x, p.y)));
    pts.push((1.0, 0.0));
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    pts.windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0).sum()
}

pub fn mauve_score(p: &EmbeddingSet, q: &EmbeddingSet, cfg: &MauveConfig) -> Result<MauveResult> {
    cfg.validate()?;
    if p.dim() != q.dim() {
        return Err(MauveError::DimensionMismatch(p.dim(), q.dim()));
    }
    // Cluster the union in a canonical order so the quantization does not
    // depend on which set is passed first.
    let mut joint: Vec<(&[f64], bool)> = p
        .vectors()
        .iter()
        .map(|v| (v.as_slice(), true))
        .chain(q.vectors().iter().map(|v| (v.as_slice(), false)))
        .collect();
    joint.sort_by(|a, b| {
        a.0.iter()
            .zip(b.0)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let points: Vec<Vec<f64>> = joint.iter().map(|(v, _)| v.to_vec()).collect();
    let k = cfg.clusters_for(points.len());
    let km = kmeans(&points, k, cfg.seed, cfg.kmeans_restarts, cfg.kmeans_max_iter)?;

    let mut pc = vec![0.0; k];
    let mut qc = vec![0.0; k];
    for ((_, from_p), &a) in joint.iter().zip(&km.assignments) {
        if *from_p {
            pc[a] += 1.0;
        } else {
            qc[a] += 1.0;
        }
    }
    let smooth = |c: Vec<f64>| {
        let total: f64 = c.iter().sum::<f64>() + cfg.epsilon * k as f64;
        c.into_iter().map(|x| (x + cfg.epsilon) / total).collect::<Vec<f64>>()
    };
    let ph = smooth(pc);
    let qh = smooth(qc);

    let frontier: Vec<FrontierPoint> = lambda_grid(cfg.grid_size)
        .into_iter()
        .map(|lambda| {
            let r: Vec<f64> = ph.iter().zip(&qh).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
            FrontierPoint {
                lambda,
                x: (-cfg.scaling_constant * kl(&qh, &r)).exp(),
                y: (-cfg.scaling_constant * kl(&ph, &r)).exp(),
            }
        })
        .collect();
    let score = frontier_area(&frontier).clamp(f64::MIN_POSITIVE, 1.0);
    Ok(MauveResult {
        score,
        num_clusters: k,
        p_hist: ph,
        q_hist: qh,
        frontier,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_symmetric() {
        let g = lambda_grid(25);
        assert_eq!(g.len(), 25);
        for i in 0..25 {
            assert!((g[i] + g[24 - i] - 1.0).abs() < 1e-15);
        }
        assert_eq!(g[12], 0.5);
    }

    #[test]
    fn k_equals_n_gives_zero_inertia() {
        let pts: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let r = kmeans(&pts, 6, 3, 1, 100).unwrap();
        assert_eq!(r.inertia, 0.0);
        let mut a = r.assignments.clone();
        a.sort();
        assert_eq!(a, vec![0, 1, 2, 3, 4, 5]);
        assert!(kmeans(&pts, 7, 0, 1, 10).is_err());
    }

    #[test]
    fn separated_clouds() {
        let mut pts = Vec::new();
        for i in 0..10 {
            pts.push(vec![i as f64 * 0.01, 0.0]);
            pts.push(vec![100.0 + i as f64 * 0.01, 5.0]);
        }
        let r = kmeans(&pts, 2, 9, 3, 100).unwrap();
        for (i, a) in r.assignments.iter().enumerate() {
            assert_eq!(*a, r.assignments[i % 2]);
        }
        assert_ne!(r.assignments[0], r.assignments[1]);
    }

    #[test]
    fn csv_with_and_without_header() {
        let a = EmbeddingSet::read_csv("id,e0,e1\na,1,2\nb,3,4\n".as_bytes()).unwrap();
        let b = EmbeddingSet::read_csv("a,1,2\nb,3,4\n".as_bytes()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.get("b"), Some(&[3.0, 4.0][..]));
        assert!(EmbeddingSet::read_csv("a,1,2\nb,3\n".as_bytes()).is_err());
    }
}
