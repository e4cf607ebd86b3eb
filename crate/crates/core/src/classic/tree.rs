use alloc::vec::Vec;
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::impurity::counts_impurity;
use super::{check_training, Classifier, Criterion, Learner};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::matrix::Matrix;
use crate::rng::{self, domain};

/// Smallest impurity decrease that justifies a split.
const MIN_GAIN: f64 = 1e-12;

/// Features considered at each split.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    Sqrt,
    Log2,
    #[default]
    All,
}

impl MaxFeatures {
    pub fn count(self, n_features: usize) -> usize {
        let p = n_features as f64;
        let m = match self {
            MaxFeatures::Sqrt => p.sqrt().floor() as usize,
            MaxFeatures::Log2 => p.log2().floor() as usize,
            MaxFeatures::All => n_features,
        };
        m.clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeConfig {
    pub criterion: Criterion,
    /// `None` grows until the other stopping rules apply.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            criterion: Criterion::Gini,
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: MaxFeatures::All,
        }
    }
}

impl TreeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_samples_split < 2 {
            return Err(Error::invalid("min_samples_split", "must be at least 2"));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::invalid("min_samples_leaf", "must be at least 1"));
        }
        if self.max_depth == Some(0) {
            return Err(Error::invalid("max_depth", "must be at least 1"));
        }
        Ok(())
    }

    /// Fits on `rows` (indices into `x`, repeats allowed).
    pub fn fit_rows<R: Rng + ?Sized>(
        &self,
        x: &Matrix,
        y: &[usize],
        n_classes: usize,
        rows: &[usize],
        rng: &mut R,
    ) -> TreeModel {
        let mut builder = Builder {
            cfg: self,
            x,
            y,
            n_classes,
            total: rows.len() as f64,
            nodes: Vec::new(),
            importance: alloc::vec![0.0; x.cols()],
            buf: Vec::with_capacity(rows.len()),
            depth: 0,
        };
        let mut idx = rows.to_vec();
        builder.grow(&mut idx, 0, rng);
        TreeModel {
            nodes: builder.nodes,
            n_classes,
            n_features: x.cols(),
            raw_importance: builder.importance,
            depth: builder.depth,
        }
    }
}

impl Learner for TreeConfig {
    type Model = TreeModel;

    fn fit_with<E: Executor>(
        &self,
        x: &Matrix,
        y: &[usize],
        n_classes: usize,
        seed: u64,
        _exec: &E,
    ) -> Result<TreeModel> {
        self.validate()?;
        check_training(x, y, n_classes)?;
        let rows: Vec<usize> = (0..x.rows()).collect();
        Ok(self.fit_rows(x, y, n_classes, &rows, &mut rng::stream(seed, domain::TREE, 0)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        counts: Vec<f64>,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub nodes: Vec<Node>,
    pub n_classes: usize,
    pub n_features: usize,
    /// Weighted impurity decrease per feature, not normalised.
    pub raw_importance: Vec<f64>,
    pub depth: usize,
}

impl TreeModel {
    pub fn leaf_counts(&self, row: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { counts } => return counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes.first()? {
            Node::Split { feature, threshold, .. } => Some((*feature, *threshold)),
            Node::Leaf { .. } => None,
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

impl Classifier for TreeModel {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    fn scores(&self, row: &[f64]) -> Vec<f64> {
        super::normalize(self.leaf_counts(row).to_vec())
    }

    fn predict_row(&self, row: &[f64]) -> usize {
        super::argmax(self.leaf_counts(row))
    }

    /// Impurity decrease per feature, normalised to sum 1 (all zeros for a single leaf).
    fn feature_importance(&self) -> Option<Vec<f64>> {
        Some(super::normalize(self.raw_importance.clone()))
    }
}

/// Midpoint between two adjacent distinct values that still separates them.
pub(crate) fn midpoint(a: f64, b: f64) -> f64 {
    let t = a + (b - a) / 2.0;
    if t >= b {
        a
    } else {
        t
    }
}

struct Builder<'a> {
    cfg: &'a TreeConfig,
    x: &'a Matrix,
    y: &'a [usize],
    n_classes: usize,
    total: f64,
    nodes: Vec<Node>,
    importance: Vec<f64>,
    buf: Vec<(f64, usize)>,
    depth: usize,
}

struct Split {
    gain: f64,
    feature: usize,
    threshold: f64,
}

impl Builder<'_> {
    fn grow<R: Rng + ?Sized>(&mut self, idx: &mut [usize], depth: usize, rng: &mut R) -> usize {
        self.depth = self.depth.max(depth);
        let mut counts = alloc::vec![0.0; self.n_classes];
        for &i in idx.iter() {
            counts[self.y[i]] += 1.0;
        }
        let at = self.nodes.len();
        let parent = counts_impurity(&counts, self.cfg.criterion);
        let stop =
            idx.len() < self.cfg.min_samples_split || self.cfg.max_depth.is_some_and(|d| depth >= d) || parent <= 0.0;
        let split = if stop {
            None
        } else {
            self.best_split(idx, &counts, parent, rng)
        };
        let Some(split) = split else {
            self.nodes.push(Node::Leaf { counts });
            return at;
        };
        self.importance[split.feature] += idx.len() as f64 / self.total * split.gain;
        self.nodes.push(Node::Leaf { counts: Vec::new() });
        let (f, t) = (split.feature, split.threshold);
        let mut mid = 0;
        for j in 0..idx.len() {
            if self.x.get(idx[j], f) <= t {
                idx.swap(mid, j);
                mid += 1;
            }
        }
        let (l, r) = idx.split_at_mut(mid);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[at] = Node::Split {
            feature: f,
            threshold: t,
            left,
            right,
        };
        at
    }

    fn best_split<R: Rng + ?Sized>(
        &mut self,
        idx: &[usize],
        counts: &[f64],
        parent: f64,
        rng: &mut R,
    ) -> Option<Split> {
        let p = self.x.cols();
        let m = self.cfg.max_features.count(p);
        let features: Vec<usize> = if m >= p {
            (0..p).collect()
        } else {
            let mut f = rng::sample_without_replacement(rng, p, m);
            f.sort_unstable();
            f
        };
        let n = idx.len();
        let nf = n as f64;
        let msl = self.cfg.min_samples_leaf;
        let mut best: Option<Split> = None;
        let mut left = alloc::vec![0.0; self.n_classes];
        let mut right = alloc::vec![0.0; self.n_classes];
        for f in features {
            self.buf.clear();
            self.buf.extend(idx.iter().map(|&i| (self.x.get(i, f), self.y[i])));
            self.buf.sort_by(|a, b| a.0.total_cmp(&b.0));
            left.iter_mut().for_each(|c| *c = 0.0);
            right.copy_from_slice(counts);
            for j in 0..n - 1 {
                let (v, c) = self.buf[j];
                left[c] += 1.0;
                right[c] -= 1.0;
                let next = self.buf[j + 1].0;
                if v == next {
                    continue;
                }
                let nl = j + 1;
                if nl < msl || n - nl < msl {
                    continue;
                }
                let gain = parent
                    - nl as f64 / nf * counts_impurity(&left, self.cfg.criterion)
                    - (n - nl) as f64 / nf * counts_impurity(&right, self.cfg.criterion);
                if gain > MIN_GAIN && best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(Split {
                        gain,
                        feature: f,
                        threshold: midpoint(v, next),
                    });
                }
            }
        }
        best
    }
}
