use alloc::vec::Vec;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{argmax, check_training, Classifier, Learner};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    Uniform,
    /// Votes weighted by `1 / d`.
    Distance,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMetric {
    #[default]
    Euclidean,
    Manhattan,
}

impl DistanceMetric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            DistanceMetric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            DistanceMetric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnConfig {
    pub k: usize,
    pub weighting: Weighting,
    pub metric: DistanceMetric,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig {
            k: 5,
            weighting: Weighting::Uniform,
            metric: DistanceMetric::Euclidean,
        }
    }
}

impl KnnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k", "must be at least 1"));
        }
        Ok(())
    }
}

/// Brute-force nearest neighbours over the stored training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub config: KnnConfig,
    pub x: Matrix,
    pub y: Vec<usize>,
    pub n_classes: usize,
}

impl Learner for KnnConfig {
    type Model = KnnModel;

    fn fit_with<E: Executor>(
        &self,
        x: &Matrix,
        y: &[usize],
        n_classes: usize,
        _seed: u64,
        _exec: &E,
    ) -> Result<KnnModel> {
        self.validate()?;
        check_training(x, y, n_classes)?;
        if self.k > x.rows() {
            return Err(Error::invalid(
                "k",
                alloc::format!("k = {} exceeds the {} training rows", self.k, x.rows()),
            ));
        }
        Ok(KnnModel {
            config: self.clone(),
            x: x.clone(),
            y: y.to_vec(),
            n_classes,
        })
    }
}

impl KnnModel {
    /// The `k` nearest training rows as `(distance, index)`, closest first;
    /// equal distances keep the lower index.
    pub fn neighbors(&self, row: &[f64]) -> Vec<(f64, usize)> {
        let mut d: Vec<(f64, usize)> = self
            .x
            .iter_rows()
            .enumerate()
            .map(|(i, r)| (self.config.metric.distance(row, r), i))
            .collect();
        let k = self.config.k;
        let order = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, order);
            d.truncate(k);
        }
        d.sort_by(order);
        d
    }
}

impl Classifier for KnnModel {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn n_features(&self) -> usize {
        self.x.cols()
    }

    /// Normalised vote weights.
    fn scores(&self, row: &[f64]) -> Vec<f64> {
        let nn = self.neighbors(row);
        let mut votes = alloc::vec![0.0; self.n_classes];
        match self.config.weighting {
            Weighting::Uniform => nn.iter().for_each(|&(_, i)| votes[self.y[i]] += 1.0),
            Weighting::Distance => {
                if nn.iter().any(|&(d, _)| d == 0.0) {
                    // Exact matches decide alone.
                    nn.iter()
                        .filter(|&&(d, _)| d == 0.0)
                        .for_each(|&(_, i)| votes[self.y[i]] += 1.0);
                } else {
                    nn.iter().for_each(|&(d, i)| votes[self.y[i]] += 1.0 / d);
                }
            }
        }
        super::normalize(votes)
    }

    fn predict_row(&self, row: &[f64]) -> usize {
        argmax(&self.scores(row))
    }
}
