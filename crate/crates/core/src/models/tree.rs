//! CART classification tree with Gini impurity.
//!
//! Candidate thresholds are midpoints between consecutive distinct values of
//! a feature among the samples at a node; a sample goes left when
//! `x < threshold`. The best split maximizes impurity decrease. Ties go to
//! the lowest feature index, then the lowest threshold. Zero-gain splits are
//! allowed so that interaction patterns such as XOR can be learned.

use serde::{Deserialize, Serialize};

use super::{check_training_data, FitConfig, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        p_real: f64,
        p_fake: f64,
        n: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub feature_subset: Vec<String>,
    /// Node 0 is the root.
    pub nodes: Vec<Node>,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub seed: u64,
}

fn gini(n_fake: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = n_fake as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [u8],
    n_features: usize,
    max_depth: usize,
    min_leaf: usize,
    nodes: Vec<Node>,
}

struct Best {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Builder<'_> {
    fn leaf(&mut self, idx: &[usize]) -> usize {
        let fake = idx.iter().filter(|&&i| self.y[i] == 1).count();
        let p_fake = fake as f64 / idx.len() as f64;
        self.nodes.push(Node::Leaf {
            p_real: 1.0 - p_fake,
            p_fake,
            n: idx.len(),
        });
        self.nodes.len() - 1
    }

    fn best_split(&self, idx: &[usize]) -> Option<Best> {
        let n = idx.len();
        let total_fake = idx.iter().filter(|&&i| self.y[i] == 1).count();
        let parent = gini(total_fake, n);
        let mut best: Option<Best> = None;
        let mut order = idx.to_vec();
        for f in 0..self.n_features {
            order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let mut left_fake = 0;
            for pos in 1..n {
                left_fake += self.y[order[pos - 1]] as usize;
                let lo = self.x[order[pos - 1]][f];
                let hi = self.x[order[pos]][f];
                if lo == hi || pos < self.min_leaf || n - pos < self.min_leaf {
                    continue;
                }
                let mut threshold = lo + (hi - lo) / 2.0;
                if threshold <= lo || !threshold.is_finite() {
                    threshold = hi;
                }
                let child = (pos as f64 * gini(left_fake, pos)
                    + (n - pos) as f64 * gini(total_fake - left_fake, n - pos))
                    / n as f64;
                let gain = parent - child;
                // strict improvement keeps the earliest feature and threshold on ties
                if best.as_ref().is_none_or(|b| gain > b.gain + 1e-12) {
                    best = Some(Best { feature: f, threshold, gain });
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: &[usize], depth: usize) -> usize {
        let fake = idx.iter().filter(|&&i| self.y[i] == 1).count();
        if depth >= self.max_depth || fake == 0 || fake == idx.len() || idx.len() < 2 * self.min_leaf {
            return self.leaf(idx);
        }
        let Some(best) = self.best_split(idx) else {
            return self.leaf(idx);
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.x[i][best.feature] < best.threshold);
        let at = self.nodes.len();
        self.nodes.push(Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: 0,
            right: 0,
        });
        let left = self.grow(&l, depth + 1);
        let right = self.grow(&r, depth + 1);
        if let Node::Split { left: ln, right: rn, .. } = &mut self.nodes[at] {
            *ln = left;
            *rn = right;
        }
        at
    }
}

pub fn fit_tree(x: &[Vec<f64>], y: &[u8], names: &[String], cfg: &FitConfig) -> Result<TreeModel> {
    cfg.validate()?;
    check_training_data(x, y, names.len())?;
    let mut b = Builder {
        x,
        y,
        n_features: names.len(),
        max_depth: cfg.max_depth,
        min_leaf: cfg.min_leaf,
        nodes: Vec::new(),
    };
    let all: Vec<usize> = (0..x.len()).collect();
    b.grow(&all, 0);
    Ok(TreeModel {
        feature_subset: names.to_vec(),
        nodes: b.nodes,
        max_depth: cfg.max_depth,
        min_leaf: cfg.min_leaf,
        seed: cfg.seed,
    })
}

impl TreeModel {
    /// Probability of fake for a row aligned to `feature_subset`.
    pub fn predict_aligned(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { p_fake, .. } => return *p_fake,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[*feature] < *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}
