//! Classical classifiers: k-nearest neighbours, CART trees, random forests,
//! second-order gradient boosting (depth-wise and oblivious growth) and a
//! one-vs-rest linear SVM.
//!
//! Every learner takes a dense feature matrix and class codes `0..n_classes`.
//! Ties between classes always resolve to the lowest code.

mod boost;
mod forest;
mod impurity;
mod knn;
mod params;
mod svm;
mod tree;

pub(crate) use boost::softmax_in_place;
pub use boost::{leaf_weight, soft_threshold, BoostConfig, BoostModel, Growth, ObliviousTree, RegNode, RegTree};
pub use forest::{ForestConfig, ForestModel};
pub use impurity::{entropy, gini, impurity, ClassDistribution, Criterion};
pub use knn::{DistanceMetric, KnnConfig, KnnModel, Weighting};
pub use params::{ModelKind, ParamValue, Params};
pub use svm::{Kernel, SvmConfig, SvmModel};
pub use tree::{MaxFeatures, Node, TreeConfig, TreeModel};

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{Executor, Sequential};
use crate::matrix::Matrix;

/// Index of the largest value; the first one wins ties. NaN never wins.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] || values[best].is_nan() && !v.is_nan() {
            best = i;
        }
    }
    best
}

/// A fitted model that scores rows.
pub trait Classifier: Send + Sync {
    fn n_classes(&self) -> usize;

    fn n_features(&self) -> usize;

    /// Per-class scores of one row: probabilities, vote shares or decision values.
    fn scores(&self, row: &[f64]) -> Vec<f64>;

    fn predict_row(&self, row: &[f64]) -> usize {
        argmax(&self.scores(row))
    }

    fn predict(&self, x: &Matrix) -> Vec<usize> {
        x.iter_rows().map(|r| self.predict_row(r)).collect()
    }

    /// Non-negative per-feature importance summing to 1, for models that have one.
    fn feature_importance(&self) -> Option<Vec<f64>> {
        None
    }
}

/// A model configuration that can be fitted.
pub trait Learner {
    type Model: Classifier;

    fn fit_with<E: Executor>(
        &self,
        x: &Matrix,
        y: &[usize],
        n_classes: usize,
        seed: u64,
        exec: &E,
    ) -> Result<Self::Model>;

    fn fit(&self, x: &Matrix, y: &[usize], n_classes: usize, seed: u64) -> Result<Self::Model> {
        self.fit_with(x, y, n_classes, seed, &Sequential)
    }
}

pub(crate) fn check_training(x: &Matrix, y: &[usize], n_classes: usize) -> Result<()> {
    if x.rows() == 0 {
        return Err(Error::Empty("training rows"));
    }
    if x.rows() != y.len() {
        return Err(Error::Shape(alloc::format!("{} rows but {} labels", x.rows(), y.len())));
    }
    if n_classes == 0 {
        return Err(Error::invalid("n_classes", "must be at least 1"));
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(Error::invalid(
            "labels",
            alloc::format!("label {bad} outside 0..{n_classes}"),
        ));
    }
    if !x.is_finite() {
        return Err(Error::invalid("features", "contain NaN or infinite values"));
    }
    Ok(())
}

pub(crate) fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.iter_mut().for_each(|x| *x /= total);
    }
    v
}

/// Any of the classical model configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Knn(KnnConfig),
    Svm(SvmConfig),
    Forest(ForestConfig),
    Boost(BoostConfig),
}

impl ModelSpec {
    /// Builds a configuration from named hyperparameters; unspecified ones keep
    /// their defaults, unknown names are rejected.
    pub fn from_params(kind: ModelKind, params: &Params) -> Result<ModelSpec> {
        params::build(kind, params)
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Knn(_) => "knn",
            ModelSpec::Svm(_) => "svm",
            ModelSpec::Forest(_) => "forest",
            ModelSpec::Boost(c) => match c.growth {
                Growth::Depthwise => "boost-depthwise",
                Growth::Oblivious => "boost-oblivious",
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Knn(c) => c.validate(),
            ModelSpec::Svm(c) => c.validate(),
            ModelSpec::Forest(c) => c.validate(),
            ModelSpec::Boost(c) => c.validate(),
        }
    }

    pub fn has_importance(&self) -> bool {
        !matches!(self, ModelSpec::Knn(_))
    }
}

/// A fitted classical model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Knn(KnnModel),
    Svm(SvmModel),
    Forest(ForestModel),
    Boost(BoostModel),
}

impl Learner for ModelSpec {
    type Model = Model;

    fn fit_with<E: Executor>(&self, x: &Matrix, y: &[usize], n_classes: usize, seed: u64, exec: &E) -> Result<Model> {
        Ok(match self {
            ModelSpec::Knn(c) => Model::Knn(c.fit_with(x, y, n_classes, seed, exec)?),
            ModelSpec::Svm(c) => Model::Svm(c.fit_with(x, y, n_classes, seed, exec)?),
            ModelSpec::Forest(c) => Model::Forest(c.fit_with(x, y, n_classes, seed, exec)?),
            ModelSpec::Boost(c) => Model::Boost(c.fit_with(x, y, n_classes, seed, exec)?),
        })
    }
}

impl Model {
    fn inner(&self) -> &dyn Classifier {
        match self {
            Model::Knn(m) => m,
            Model::Svm(m) => m,
            Model::Forest(m) => m,
            Model::Boost(m) => m,
        }
    }
}

impl Classifier for Model {
    fn n_classes(&self) -> usize {
        self.inner().n_classes()
    }

    fn n_features(&self) -> usize {
        self.inner().n_features()
    }

    fn scores(&self, row: &[f64]) -> Vec<f64> {
        self.inner().scores(row)
    }

    fn predict_row(&self, row: &[f64]) -> usize {
        self.inner().predict_row(row)
    }

    fn feature_importance(&self) -> Option<Vec<f64>> {
        self.inner().feature_importance()
    }
}
