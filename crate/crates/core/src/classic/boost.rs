//! Multiclass gradient boosting with second-order leaf weights.
//!
//! Each round fits one regression tree per class to the softmax
//! cross-entropy gradients `g = p - y` and hessians `h = p (1 - p)`.
//! A leaf collecting sums `G`, `H` gets weight `-T(G) / (H + lambda)` where
//! `T` soft-thresholds by `alpha`, and a split is kept only when
//! `1/2 [T(G_L)^2/(H_L+lambda) + T(G_R)^2/(H_R+lambda) - T(G)^2/(H+lambda)]`
//! exceeds `gamma` and both children keep `H >= min_child_weight`.
//! Features are pre-binned into at most `max_bins` ordered bins.

use alloc::vec::Vec;
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use super::tree::midpoint;
use super::{check_training, Classifier, Learner};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::matrix::Matrix;
use crate::rng::{self, domain, StreamRng};

/// Deepest symmetric tree allowed (2^16 leaves).
pub const MAX_OBLIVIOUS_DEPTH: usize = 16;

const MIN_HESSIAN: f64 = 1e-16;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    /// Node-by-node growth, each node choosing its own split.
    #[default]
    Depthwise,
    /// Symmetric trees sharing one split per level.
    Oblivious,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostConfig {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    /// L1 penalty on leaf weights.
    pub alpha: f64,
    /// Minimum split gain.
    pub gamma: f64,
    pub min_child_weight: f64,
    /// Fraction of rows drawn without replacement each round.
    pub subsample: f64,
    /// Fraction of features available to each tree.
    pub colsample_bytree: f64,
    pub max_bins: usize,
    pub growth: Growth,
    /// Row weights follow a gamma law with shape `1 / t` and mean 1; 0 disables.
    pub bagging_temperature: f64,
    /// Scale of the random perturbation of split scores during split selection.
    pub random_strength: f64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            n_rounds: 100,
            learning_rate: 0.1,
            max_depth: 6,
            lambda: 1.0,
            alpha: 0.0,
            gamma: 0.0,
            min_child_weight: 1.0,
            subsample: 1.0,
            colsample_bytree: 1.0,
            max_bins: 256,
            growth: Growth::Depthwise,
            bagging_temperature: 0.0,
            random_strength: 0.0,
        }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |field: &str, reason: &str| Err(Error::invalid(field, reason));
        if self.n_rounds == 0 {
            return fail("n_rounds", "must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.learning_rate) {
            return fail("learning_rate", "must lie in [0, 1]");
        }
        if self.max_depth == 0 {
            return fail("max_depth", "must be at least 1");
        }
        if self.growth == Growth::Oblivious && self.max_depth > MAX_OBLIVIOUS_DEPTH {
            return fail("max_depth", "oblivious trees are limited to depth 16");
        }
        for (name, v) in [
            ("lambda", self.lambda),
            ("alpha", self.alpha),
            ("gamma", self.gamma),
            ("min_child_weight", self.min_child_weight),
            ("bagging_temperature", self.bagging_temperature),
            ("random_strength", self.random_strength),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return fail(name, "must be finite and non-negative");
            }
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return fail("subsample", "must lie in (0, 1]");
        }
        if !(self.colsample_bytree > 0.0 && self.colsample_bytree <= 1.0) {
            return fail("colsample_bytree", "must lie in (0, 1]");
        }
        if !(2..=65_535).contains(&self.max_bins) {
            return fail("max_bins", "must lie in [2, 65535]");
        }
        Ok(())
    }
}

/// `sign(g) * max(|g| - alpha, 0)`.
pub fn soft_threshold(g: f64, alpha: f64) -> f64 {
    if g > alpha {
        g - alpha
    } else if g < -alpha {
        g + alpha
    } else {
        0.0
    }
}

fn weight_from_sums(g: f64, h: f64, lambda: f64, alpha: f64) -> f64 {
    let denom = h + lambda;
    if denom <= 0.0 {
        0.0
    } else {
        -soft_threshold(g, alpha) / denom
    }
}

fn score(g: f64, h: f64, lambda: f64, alpha: f64) -> f64 {
    let denom = h + lambda;
    if denom <= 0.0 {
        0.0
    } else {
        let t = soft_threshold(g, alpha);
        t * t / denom
    }
}

/// Optimal weight of a leaf holding gradients `g` and hessians `h`.
pub fn leaf_weight(g: &[f64], h: &[f64], lambda: f64, alpha: f64) -> f64 {
    weight_from_sums(g.iter().sum(), h.iter().sum(), lambda, alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RegNode {
    Leaf {
        weight: f64,
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
pub struct RegTree {
    pub nodes: Vec<RegNode>,
}

impl RegTree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                RegNode::Leaf { weight } => return weight,
                RegNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[feature] <= threshold { left } else { right },
            }
        }
    }
}

/// A symmetric tree: level `l` sends a row right when `x[features[l]] > thresholds[l]`,
/// and the leaf index reads those decisions as binary digits, first level most significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObliviousTree {
    pub features: Vec<usize>,
    pub thresholds: Vec<f64>,
    pub leaves: Vec<f64>,
}

impl ObliviousTree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut idx = 0usize;
        for (&f, &t) in self.features.iter().zip(&self.thresholds) {
            idx = idx * 2 + usize::from(row[f] > t);
        }
        self.leaves[idx]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "growth", rename_all = "snake_case")]
pub enum BoostTree {
    Depthwise(RegTree),
    Oblivious(ObliviousTree),
}

impl BoostTree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        match self {
            BoostTree::Depthwise(t) => t.predict(row),
            BoostTree::Oblivious(t) => t.predict(row),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModel {
    pub config: BoostConfig,
    pub n_classes: usize,
    pub n_features: usize,
    /// Initial scores: log class priors.
    pub base_scores: Vec<f64>,
    /// `trees[m][k]` is round `m`'s tree for class `k`.
    pub trees: Vec<Vec<BoostTree>>,
    /// Total split gain per feature, not normalised.
    pub gain: Vec<f64>,
    /// Mean training cross-entropy after each round.
    pub train_loss: Vec<f64>,
}

impl BoostModel {
    pub fn margins(&self, row: &[f64]) -> Vec<f64> {
        let mut f = self.base_scores.clone();
        for round in &self.trees {
            for (fk, t) in f.iter_mut().zip(round) {
                *fk += self.config.learning_rate * t.predict(row);
            }
        }
        f
    }
}

pub(crate) fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    v.iter_mut().for_each(|x| *x /= sum);
}

impl Classifier for BoostModel {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    /// Softmax class probabilities.
    fn scores(&self, row: &[f64]) -> Vec<f64> {
        let mut m = self.margins(row);
        softmax_in_place(&mut m);
        m
    }

    fn predict_row(&self, row: &[f64]) -> usize {
        super::argmax(&self.margins(row))
    }

    fn feature_importance(&self) -> Option<Vec<f64>> {
        Some(super::normalize(self.gain.clone()))
    }
}

/// Per-feature bin borders and the column-major bin codes of the training rows.
struct Binned {
    borders: Vec<Vec<f64>>,
    codes: Vec<u16>,
    n: usize,
}

impl Binned {
    fn new(x: &Matrix, max_bins: usize) -> Binned {
        let n = x.rows();
        let mut borders = Vec::with_capacity(x.cols());
        let mut codes = Vec::with_capacity(n * x.cols());
        for f in 0..x.cols() {
            let col = x.column(f);
            let mut u = col.clone();
            u.sort_by(f64::total_cmp);
            u.dedup();
            let b: Vec<f64> = if u.len() <= max_bins {
                u.windows(2).map(|w| midpoint(w[0], w[1])).collect()
            } else {
                (1..max_bins)
                    .map(|q| {
                        let pos = q * u.len() / max_bins;
                        midpoint(u[pos - 1], u[pos])
                    })
                    .collect()
            };
            codes.extend(col.iter().map(|&v| b.partition_point(|&t| t < v) as u16));
            borders.push(b);
        }
        Binned { borders, codes, n }
    }

    #[inline]
    fn code(&self, row: usize, f: usize) -> usize {
        self.codes[f * self.n + row] as usize
    }

    fn n_bins(&self, f: usize) -> usize {
        self.borders[f].len() + 1
    }
}

struct TreeFit<'a> {
    cfg: &'a BoostConfig,
    bins: &'a Binned,
    g: &'a [f64],
    h: &'a [f64],
    features: Vec<usize>,
    gain: Vec<f64>,
    noise_scale: f64,
}

struct Candidate {
    gain: f64,
    feature: usize,
    bin: usize,
}

impl TreeFit<'_> {
    fn noisy<R: Rng + ?Sized>(&self, gain: f64, rng: &mut R) -> f64 {
        if self.noise_scale > 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            gain + self.noise_scale * z
        } else {
            gain
        }
    }

    fn sums(&self, rows: &[usize]) -> (f64, f64) {
        rows.iter()
            .fold((0.0, 0.0), |(g, h), &i| (g + self.g[i], h + self.h[i]))
    }

    fn grow_depthwise<R: Rng + ?Sized>(
        &mut self,
        nodes: &mut Vec<RegNode>,
        rows: &mut [usize],
        depth: usize,
        rng: &mut R,
    ) -> usize {
        let (g, h) = self.sums(rows);
        let at = nodes.len();
        let (lambda, alpha) = (self.cfg.lambda, self.cfg.alpha);
        let split = if depth < self.cfg.max_depth && rows.len() >= 2 {
            self.best_node_split(rows, g, h, rng)
        } else {
            None
        };
        let Some(split) = split else {
            nodes.push(RegNode::Leaf {
                weight: weight_from_sums(g, h, lambda, alpha),
            });
            return at;
        };
        self.gain[split.feature] += split.gain;
        nodes.push(RegNode::Leaf { weight: 0.0 });
        let mut mid = 0;
        for j in 0..rows.len() {
            if self.bins.code(rows[j], split.feature) <= split.bin {
                rows.swap(mid, j);
                mid += 1;
            }
        }
        let (l, r) = rows.split_at_mut(mid);
        let left = self.grow_depthwise(nodes, l, depth + 1, rng);
        let right = self.grow_depthwise(nodes, r, depth + 1, rng);
        nodes[at] = RegNode::Split {
            feature: split.feature,
            threshold: self.bins.borders[split.feature][split.bin],
            left,
            right,
        };
        at
    }

    fn best_node_split<R: Rng + ?Sized>(&self, rows: &[usize], g: f64, h: f64, rng: &mut R) -> Option<Candidate> {
        let (lambda, alpha, mcw) = (self.cfg.lambda, self.cfg.alpha, self.cfg.min_child_weight);
        let parent = score(g, h, lambda, alpha);
        let mut best: Option<(f64, Candidate)> = None;
        let mut hg = Vec::new();
        let mut hh = Vec::new();
        for &f in &self.features {
            let nb = self.bins.n_bins(f);
            if nb < 2 {
                continue;
            }
            hg.clear();
            hg.resize(nb, 0.0);
            hh.clear();
            hh.resize(nb, 0.0);
            for &i in rows {
                let c = self.bins.code(i, f);
                hg[c] += self.g[i];
                hh[c] += self.h[i];
            }
            let (mut gl, mut hl) = (0.0, 0.0);
            for b in 0..nb - 1 {
                gl += hg[b];
                hl += hh[b];
                let (gr, hr) = (g - gl, h - hl);
                if hl < mcw || hr < mcw || hl <= 0.0 || hr <= 0.0 {
                    continue;
                }
                let gain = 0.5 * (score(gl, hl, lambda, alpha) + score(gr, hr, lambda, alpha) - parent);
                if !(gain > self.cfg.gamma) {
                    continue;
                }
                let s = self.noisy(gain, rng);
                if best.as_ref().is_none_or(|(bs, _)| s > *bs) {
                    best = Some((
                        s,
                        Candidate {
                            gain,
                            feature: f,
                            bin: b,
                        },
                    ));
                }
            }
        }
        best.map(|(_, c)| c)
    }

    fn grow_oblivious<R: Rng + ?Sized>(&mut self, rows: &[usize], rng: &mut R) -> ObliviousTree {
        let (lambda, alpha, mcw) = (self.cfg.lambda, self.cfg.alpha, self.cfg.min_child_weight);
        let mut leaf_of: Vec<usize> = alloc::vec![0; rows.len()];
        let mut features = Vec::new();
        let mut thresholds = Vec::new();
        let mut hg = Vec::new();
        let mut hh = Vec::new();
        for level in 0..self.cfg.max_depth {
            let n_leaves = 1usize << level;
            let mut lg = alloc::vec![0.0; n_leaves];
            let mut lh = alloc::vec![0.0; n_leaves];
            for (j, &i) in rows.iter().enumerate() {
                lg[leaf_of[j]] += self.g[i];
                lh[leaf_of[j]] += self.h[i];
            }
            let parent: f64 = (0..n_leaves).map(|l| score(lg[l], lh[l], lambda, alpha)).sum();
            let mut best: Option<(f64, Candidate)> = None;
            for &f in &self.features {
                let nb = self.bins.n_bins(f);
                if nb < 2 {
                    continue;
                }
                hg.clear();
                hg.resize(n_leaves * nb, 0.0);
                hh.clear();
                hh.resize(n_leaves * nb, 0.0);
                for (j, &i) in rows.iter().enumerate() {
                    let c = leaf_of[j] * nb + self.bins.code(i, f);
                    hg[c] += self.g[i];
                    hh[c] += self.h[i];
                }
                let mut gl = alloc::vec![0.0; n_leaves];
                let mut hl = alloc::vec![0.0; n_leaves];
                for b in 0..nb - 1 {
                    let mut children = 0.0;
                    let mut valid = false;
                    for l in 0..n_leaves {
                        gl[l] += hg[l * nb + b];
                        hl[l] += hh[l * nb + b];
                        let (gr, hr) = (lg[l] - gl[l], lh[l] - hl[l]);
                        if hl[l] >= mcw && hr >= mcw && hl[l] > 0.0 && hr > 0.0 {
                            valid = true;
                            children += score(gl[l], hl[l], lambda, alpha) + score(gr, hr, lambda, alpha);
                        } else {
                            children += score(lg[l], lh[l], lambda, alpha);
                        }
                    }
                    let gain = 0.5 * (children - parent);
                    if !valid || !(gain > self.cfg.gamma * n_leaves as f64) {
                        continue;
                    }
                    let s = self.noisy(gain, rng);
                    if best.as_ref().is_none_or(|(bs, _)| s > *bs) {
                        best = Some((
                            s,
                            Candidate {
                                gain,
                                feature: f,
                                bin: b,
                            },
                        ));
                    }
                }
            }
            let Some((_, split)) = best else { break };
            self.gain[split.feature] += split.gain;
            for (j, &i) in rows.iter().enumerate() {
                leaf_of[j] = leaf_of[j] * 2 + usize::from(self.bins.code(i, split.feature) > split.bin);
            }
            features.push(split.feature);
            thresholds.push(self.bins.borders[split.feature][split.bin]);
        }
        let n_leaves = 1usize << features.len();
        let mut lg = alloc::vec![0.0; n_leaves];
        let mut lh = alloc::vec![0.0; n_leaves];
        for (j, &i) in rows.iter().enumerate() {
            lg[leaf_of[j]] += self.g[i];
            lh[leaf_of[j]] += self.h[i];
        }
        let leaves = (0..n_leaves)
            .map(|l| weight_from_sums(lg[l], lh[l], lambda, alpha))
            .collect();
        ObliviousTree {
            features,
            thresholds,
            leaves,
        }
    }
}

fn cross_entropy(margins: &[f64], y: &[usize], k: usize) -> f64 {
    let mut total = 0.0;
    let mut p = alloc::vec![0.0; k];
    for (i, &c) in y.iter().enumerate() {
        p.copy_from_slice(&margins[i * k..(i + 1) * k]);
        softmax_in_place(&mut p);
        total -= p[c].max(1e-300).ln();
    }
    total / y.len() as f64
}

impl Learner for BoostConfig {
    type Model = BoostModel;

    /// Trees of round `m` and class `k` draw from stream `m * n_classes + k`;
    /// row sampling and bagging weights of round `m` from stream `m`.
    fn fit_with<E: Executor>(
        &self,
        x: &Matrix,
        y: &[usize],
        n_classes: usize,
        seed: u64,
        exec: &E,
    ) -> Result<BoostModel> {
        self.validate()?;
        check_training(x, y, n_classes)?;
        let n = x.rows();
        let p = x.cols();
        let k = n_classes;
        let bins = Binned::new(x, self.max_bins);

        let mut counts = alloc::vec![0.0; k];
        y.iter().for_each(|&c| counts[c] += 1.0);
        let base_scores: Vec<f64> = counts.iter().map(|&c| (c / n as f64).max(1e-6).ln()).collect();
        let mut margins: Vec<f64> = (0..n).flat_map(|_| base_scores.iter().copied()).collect();

        let n_rows = ((self.subsample * n as f64).round() as usize).clamp(1, n);
        let n_cols = ((self.colsample_bytree * p as f64).round() as usize).clamp(1, p.max(1));
        let gamma_law = if self.bagging_temperature > 0.0 {
            Some(
                Gamma::new(1.0 / self.bagging_temperature, self.bagging_temperature)
                    .map_err(|_| Error::invalid("bagging_temperature", "out of range"))?,
            )
        } else {
            None
        };

        let mut trees = Vec::with_capacity(self.n_rounds);
        let mut gain = alloc::vec![0.0; p];
        let mut train_loss = Vec::with_capacity(self.n_rounds);
        let mut prob = alloc::vec![0.0; n * k];
        for m in 0..self.n_rounds {
            let mut row_rng = rng::stream(seed, domain::BOOST_ROWS, m as u64);
            let mut rows: Vec<usize> = if n_rows < n {
                let mut r = rng::sample_without_replacement(&mut row_rng, n, n_rows);
                r.sort_unstable();
                r
            } else {
                (0..n).collect()
            };
            let weights: Option<Vec<f64>> = gamma_law.map(|law| (0..n).map(|_| law.sample(&mut row_rng)).collect());

            prob.copy_from_slice(&margins);
            prob.chunks_mut(k).for_each(softmax_in_place);

            let fitted = exec.map(k, |c| {
                let mut g = alloc::vec![0.0; n];
                let mut h = alloc::vec![0.0; n];
                for &i in &rows {
                    let pi = prob[i * k + c];
                    let w = weights.as_ref().map_or(1.0, |w| w[i]);
                    g[i] = w * (pi - f64::from(u8::from(y[i] == c)));
                    h[i] = w * (pi * (1.0 - pi)).max(MIN_HESSIAN);
                }
                let mut tree_rng: StreamRng = rng::stream(seed, domain::BOOST_TREE, (m * k + c) as u64);
                let features = if n_cols < p {
                    let mut f = rng::sample_without_replacement(&mut tree_rng, p, n_cols);
                    f.sort_unstable();
                    f
                } else {
                    (0..p).collect()
                };
                let noise_scale = if self.random_strength > 0.0 {
                    let mg = rows.iter().map(|&i| g[i] * g[i]).sum::<f64>() / rows.len() as f64;
                    let mh = rows.iter().map(|&i| h[i]).sum::<f64>() / rows.len() as f64;
                    self.random_strength * mg / mh.max(MIN_HESSIAN)
                } else {
                    0.0
                };
                let mut fit = TreeFit {
                    cfg: self,
                    bins: &bins,
                    g: &g,
                    h: &h,
                    features,
                    gain: alloc::vec![0.0; p],
                    noise_scale,
                };
                let tree = match self.growth {
                    Growth::Depthwise => {
                        let mut nodes = Vec::new();
                        let mut r = rows.clone();
                        fit.grow_depthwise(&mut nodes, &mut r, 0, &mut tree_rng);
                        BoostTree::Depthwise(RegTree { nodes })
                    }
                    Growth::Oblivious => BoostTree::Oblivious(fit.grow_oblivious(&rows, &mut tree_rng)),
                };
                (tree, fit.gain)
            });
            rows.clear();

            let mut round = Vec::with_capacity(k);
            for (c, (tree, tree_gain)) in fitted.into_iter().enumerate() {
                for (acc, v) in gain.iter_mut().zip(tree_gain) {
                    *acc += v;
                }
                if self.learning_rate != 0.0 {
                    for i in 0..n {
                        margins[i * k + c] += self.learning_rate * tree.predict(x.row(i));
                    }
                }
                round.push(tree);
            }
            trees.push(round);
            train_loss.push(cross_entropy(&margins, y, k));
        }
        Ok(BoostModel {
            config: self.clone(),
            n_classes,
            n_features: p,
            base_scores,
            trees,
            gain,
            train_loss,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(n: usize, seed: u64) -> (Matrix, Vec<usize>) {
        let mut rng = rng::stream(seed, 0, 0);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let r: [f64; 4] = core::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let z = r[0] + 0.5 * r[1] + 0.3 * rng.random_range(-1.0..1.0);
            y.push(if z < -0.4 {
                0
            } else if z < 0.4 {
                1
            } else {
                2
            });
            rows.push(r);
        }
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn closed_form_leaf_weight() {
        assert!((leaf_weight(&[1.0, -2.0], &[1.0, 1.0], 1.0, 0.0) - 1.0 / 3.0).abs() < 1e-12);
        // Squared error: g = prediction - target, h = 1, so w is the mean residual.
        let targets = [1.0, 2.0, 6.0];
        let g: Vec<f64> = targets.iter().map(|t| 0.0 - t).collect();
        assert!((leaf_weight(&g, &[1.0; 3], 0.0, 0.0) - 3.0).abs() < 1e-12);
        assert_eq!(leaf_weight(&[0.5, -0.2], &[1.0, 1.0], 1.0, 0.5), 0.0);
        assert!((leaf_weight(&[2.0], &[1.0], 1.0, 0.5) + 0.75).abs() < 1e-12);
    }

    #[test]
    fn zero_learning_rate_predicts_prior() {
        let (x, y) = fixture(90, 1);
        let cfg = BoostConfig {
            n_rounds: 3,
            learning_rate: 0.0,
            ..BoostConfig::default()
        };
        let m = cfg.fit(&x, &y, 3, 0).unwrap();
        let mut counts = [0.0; 3];
        y.iter().for_each(|&c| counts[c] += 1.0);
        let prior = super::super::argmax(&counts);
        assert!(m.predict(&x).iter().all(|&c| c == prior));
    }

    #[test]
    fn loss_decreases_and_fits() {
        for growth in [Growth::Depthwise, Growth::Oblivious] {
            let (x, y) = fixture(300, 2);
            let cfg = BoostConfig {
                n_rounds: 30,
                max_depth: 3,
                growth,
                ..BoostConfig::default()
            };
            let m = cfg.fit(&x, &y, 3, 0).unwrap();
            assert!(m.train_loss.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{growth:?}");
            let acc = m.predict(&x).iter().zip(&y).filter(|(a, b)| a == b).count() as f64 / 300.0;
            assert!(acc > 0.8, "{growth:?} accuracy {acc}");
            let imp = m.feature_importance().unwrap();
            assert!(imp[0] > imp[2] && imp[0] > imp[3]);
        }
    }

    #[test]
    fn oblivious_levels_share_splits() {
        let (x, y) = fixture(200, 3);
        let cfg = BoostConfig {
            n_rounds: 2,
            max_depth: 4,
            growth: Growth::Oblivious,
            bagging_temperature: 0.5,
            random_strength: 1.0,
            ..BoostConfig::default()
        };
        let m = cfg.fit(&x, &y, 3, 0).unwrap();
        for t in m.trees.iter().flatten() {
            let BoostTree::Oblivious(t) = t else { panic!() };
            assert!(t.features.len() <= 4);
            assert_eq!(t.leaves.len(), 1 << t.features.len());
        }
    }

    #[test]
    fn invalid_bounds_named() {
        let bad = BoostConfig {
            subsample: 0.0,
            ..BoostConfig::default()
        };
        match bad.validate() {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "subsample"),
            other => panic!("{other:?}"),
        }
    }
}
