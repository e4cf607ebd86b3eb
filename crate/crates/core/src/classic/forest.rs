use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, check_training, Classifier, Learner, TreeConfig, TreeModel};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::matrix::Matrix;
use crate::rng::{self, domain};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_estimators: usize,
    #[serde(flatten)]
    pub tree: TreeConfig,
    /// Fit each tree on a size-n resample drawn with replacement.
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_estimators: 100,
            tree: TreeConfig {
                max_features: super::MaxFeatures::Sqrt,
                ..TreeConfig::default()
            },
            bootstrap: true,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_estimators == 0 {
            return Err(Error::invalid("n_estimators", "must be at least 1"));
        }
        self.tree.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
    pub n_classes: usize,
    pub n_features: usize,
}

impl Learner for ForestConfig {
    type Model = ForestModel;

    /// Tree `b` draws its bootstrap sample and feature subsets from stream `b`
    /// of `seed`, so tree 0 of an unbootstrapped forest is the tree
    /// [`TreeConfig::fit`] builds with the same seed.
    fn fit_with<E: Executor>(
        &self,
        x: &Matrix,
        y: &[usize],
        n_classes: usize,
        seed: u64,
        exec: &E,
    ) -> Result<ForestModel> {
        self.validate()?;
        check_training(x, y, n_classes)?;
        let n = x.rows();
        let trees = exec.map(self.n_estimators, |b| {
            let mut rng = rng::stream(seed, domain::TREE, b as u64);
            let rows: Vec<usize> = if self.bootstrap {
                let mut boot = rng::stream(seed, domain::BOOTSTRAP, b as u64);
                (0..n).map(|_| boot.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            self.tree.fit_rows(x, y, n_classes, &rows, &mut rng)
        });
        Ok(ForestModel {
            trees,
            n_classes,
            n_features: x.cols(),
        })
    }
}

impl ForestModel {
    pub fn votes(&self, row: &[f64]) -> Vec<usize> {
        let mut votes = alloc::vec![0usize; self.n_classes];
        for t in &self.trees {
            votes[t.predict_row(row)] += 1;
        }
        votes
    }
}

impl Classifier for ForestModel {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    /// Vote shares.
    fn scores(&self, row: &[f64]) -> Vec<f64> {
        let b = self.trees.len() as f64;
        self.votes(row).into_iter().map(|v| v as f64 / b).collect()
    }

    fn predict_row(&self, row: &[f64]) -> usize {
        let votes: Vec<f64> = self.votes(row).into_iter().map(|v| v as f64).collect();
        argmax(&votes)
    }

    /// Mean of the per-tree normalised importances.
    fn feature_importance(&self) -> Option<Vec<f64>> {
        let mut total = alloc::vec![0.0; self.n_features];
        for t in &self.trees {
            for (acc, v) in total.iter_mut().zip(t.feature_importance()?) {
                *acc += v;
            }
        }
        Some(super::normalize(total))
    }
}
