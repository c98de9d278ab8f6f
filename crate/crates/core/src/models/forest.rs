//! Random forest of variance-reduction regression trees.

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::check_finite_rows;
use crate::seed::{rng, splitmix64};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// `None` means ⌈F/3⌉.
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig { n_trees: 100, max_depth: 5, min_samples_leaf: 2, features_per_split: None, bootstrap: true, seed: 42 }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.n_trees == 0 {
            errs.push("forest.n_trees must be at least 1".into());
        }
        if self.min_samples_leaf == 0 {
            errs.push("forest.min_samples_leaf must be at least 1".into());
        }
        if self.features_per_split == Some(0) {
            errs.push("forest.features_per_split must be at least 1".into());
        }
        errs
    }

    fn split_features(&self, width: usize) -> usize {
        self.features_per_split.unwrap_or(width.div_ceil(3)).clamp(1, width.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { value: f64 },
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    /// Arena; index 0 is the root.
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_one(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Number of splits on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub width: usize,
}

/// Mean anchored at the first element, exact for constant input.
fn stable_mean(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut it = v.clone();
    let Some(first) = it.next() else { return 0.0 };
    let (sum, n) = v.fold((0.0, 0usize), |(s, n), x| (s + (x - first), n + 1));
    first + sum / n as f64
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    cfg: &'a ForestConfig,
    k: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let id = self.nodes.len();
        let value = stable_mean(idx.iter().map(|&i| self.y[i]));
        self.nodes.push(Node::Leaf { value });
        let y0 = self.y[idx[0]];
        if depth >= self.cfg.max_depth
            || idx.len() < 2 * self.cfg.min_samples_leaf
            || idx.iter().all(|&i| self.y[i] == y0)
        {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(idx) else { return id };
        let mut lo = 0;
        for j in 0..idx.len() {
            if self.x[idx[j]][feature] <= threshold {
                idx.swap(lo, j);
                lo += 1;
            }
        }
        let (l, r) = idx.split_at_mut(lo);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split { feature, threshold, left, right };
        id
    }

    /// Maximises the drop in squared error over a random feature subset.
    fn best_split(&mut self, idx: &[usize]) -> Option<(usize, f64)> {
        let width = self.x[0].len();
        let mut feats = index::sample(&mut self.rng, width, self.k).into_vec();
        feats.sort_unstable();
        let n = idx.len();
        let total: f64 = idx.iter().map(|&i| self.y[i]).sum();
        let min_leaf = self.cfg.min_samples_leaf;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order = idx.to_vec();
        for f in feats {
            order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]));
            let mut left_sum = 0.0;
            for s in 0..n - 1 {
                left_sum += self.y[order[s]];
                let nl = s + 1;
                let (a, b) = (self.x[order[s]][f], self.x[order[s + 1]][f]);
                if a == b || nl < min_leaf || n - nl < min_leaf {
                    continue;
                }
                let right_sum = total - left_sum;
                // SSE reduction up to the constant term Σy²
                let gain = left_sum * left_sum / nl as f64 + right_sum * right_sum / (n - nl) as f64 - total * total / n as f64;
                if best.is_none_or(|(g, _, _)| gain > g) {
                    let mid = a + (b - a) / 2.0;
                    let threshold = if mid < b { mid } else { a };
                    best = Some((gain, f, threshold));
                }
            }
        }
        best.filter(|(g, _, _)| *g > 0.0).map(|(_, f, t)| (f, t))
    }
}

pub fn fit_random_forest(x: &[Vec<f64>], y: &[f64], config: &ForestConfig) -> Result<Forest> {
    let errs = config.validate();
    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    let width = check_finite_rows(x, y)?;
    if x.len() < 2 {
        return Err(Error::InsufficientData("random forest needs at least 2 rows".into()));
    }
    let k = config.split_features(width);
    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut r = rng(splitmix64(config.seed ^ splitmix64(t as u64)));
            let mut idx: Vec<usize> = if config.bootstrap {
                (0..x.len()).map(|_| r.random_range(0..x.len())).collect()
            } else {
                (0..x.len()).collect()
            };
            let mut b = Builder { x, y, cfg: config, k, rng: r, nodes: Vec::new() };
            b.grow(&mut idx, 0);
            Tree { nodes: b.nodes }
        })
        .collect();
    Ok(Forest { trees, width })
}

pub fn forest_predict(forest: &Forest, x: &[Vec<f64>]) -> Vec<f64> {
    x.iter().map(|r| forest.predict_one(r)).collect()
}

impl Forest {
    pub fn predict_one(&self, x: &[f64]) -> f64 {
        stable_mean(self.trees.iter().map(|t| t.predict_one(x)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn random_data(n: usize, f: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..f).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
        let y = x.iter().map(|v| v[0].sin() + v[1] * v[1] + r.random_range(-0.1..0.1)).collect();
        (x, y)
    }

    #[test]
    fn constant_target() {
        let (x, _) = random_data(60, 3, 1);
        let y = vec![7.0; 60];
        let f = fit_random_forest(&x, &y, &ForestConfig::default()).unwrap();
        assert!(forest_predict(&f, &x).iter().all(|p| *p == 7.0));
        let y = vec![0.1; 60];
        let f = fit_random_forest(&x, &y, &ForestConfig::default()).unwrap();
        assert!(forest_predict(&f, &x).iter().all(|p| *p == 0.1));
    }

    #[test]
    fn step_threshold_in_gap() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).chain((0..20).map(|i| 5.0 + i as f64 * 0.1)).collect();
        let x: Vec<Vec<f64>> = xs.iter().map(|v| vec![*v]).collect();
        let y: Vec<f64> = xs.iter().map(|v| if *v < 3.0 { 1.0 } else { 4.0 }).collect();
        let cfg = ForestConfig { n_trees: 1, max_depth: 1, bootstrap: false, ..ForestConfig::default() };
        let f = fit_random_forest(&x, &y, &cfg).unwrap();
        let Node::Split { threshold, .. } = f.trees[0].nodes[0] else { panic!("no split") };

        // brute force: every midpoint between distinct sorted values
        let mut sorted = xs.clone();
        sorted.sort_by(f64::total_cmp);
        let sse = |t: f64| {
            let side = |left: bool| -> f64 {
                let v: Vec<f64> = xs.iter().zip(&y).filter(|(x, _)| (**x <= t) == left).map(|(_, y)| *y).collect();
                let m = v.iter().sum::<f64>() / v.len() as f64;
                v.iter().map(|a| (a - m).powi(2)).sum()
            };
            side(true) + side(false)
        };
        let best = sorted.windows(2).filter(|w| w[0] != w[1]).map(|w| (w[0] + w[1]) / 2.0)
            .min_by(|a, b| sse(*a).total_cmp(&sse(*b))).unwrap();
        assert!(threshold > 1.9 && threshold < 5.0);
        assert!((threshold - best).abs() < 1e-12);
    }

    #[test]
    fn depth_bounded() {
        let (x, y) = random_data(5000, 4, 2);
        let cfg = ForestConfig { n_trees: 10, ..ForestConfig::default() };
        let f = fit_random_forest(&x, &y, &cfg).unwrap();
        assert!(f.trees.iter().all(|t| t.depth() <= 5));
        assert!(f.trees.iter().any(|t| t.depth() == 5));
    }

    #[test]
    fn predictions_within_target_range_and_order_free() {
        let (x, y) = random_data(300, 3, 3);
        let f = fit_random_forest(&x, &y, &ForestConfig::default()).unwrap();
        let (lo, hi) = y.iter().fold((f64::MAX, f64::MIN), |(a, b), v| (a.min(*v), b.max(*v)));
        let (tx, _) = random_data(200, 3, 4);
        let p = forest_predict(&f, &tx);
        assert!(p.iter().all(|v| *v >= lo && *v <= hi));
        let mut rev = f.clone();
        rev.trees.reverse();
        for (a, b) in p.iter().zip(forest_predict(&rev, &tx)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_and_learns() {
        let (x, y) = random_data(400, 3, 5);
        let a = fit_random_forest(&x, &y, &ForestConfig::default()).unwrap();
        let b = fit_random_forest(&x, &y, &ForestConfig::default()).unwrap();
        assert_eq!(a, b);
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let base: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
        let fit: f64 = forest_predict(&a, &x).iter().zip(&y).map(|(p, v)| (p - v).powi(2)).sum();
        assert!(fit < 0.3 * base);
    }

    #[test]
    fn leaves_respect_min_samples() {
        let (x, y) = random_data(100, 2, 6);
        let cfg = ForestConfig { n_trees: 1, bootstrap: false, max_depth: 20, min_samples_leaf: 5, ..ForestConfig::default() };
        let f = fit_random_forest(&x, &y, &cfg).unwrap();
        let mut counts = std::collections::HashMap::new();
        for r in &x {
            let mut i = 0;
            while let Node::Split { feature, threshold, left, right } = f.trees[0].nodes[i] {
                i = if r[feature] <= threshold { left } else { right };
            }
            *counts.entry(i).or_insert(0) += 1;
        }
        assert!(counts.values().all(|c| *c >= 5));
    }
}
