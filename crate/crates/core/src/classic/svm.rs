//! One-vs-rest linear SVM trained by stochastic subgradient descent on the
//! primal soft-margin objective `lambda/2 |w|^2 + mean(max(0, 1 - y w.x))`
//! with `lambda = 1 / (C n)`. The bias is an extra weight on a constant
//! feature. The returned weights average the iterates of the second half of
//! training.

use alloc::vec::Vec;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{check_training, Classifier, Learner};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::matrix::Matrix;
use crate::rng::{self, domain};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    #[default]
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    pub c: f64,
    pub kernel: Kernel,
    pub epochs: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            kernel: Kernel::Linear,
            epochs: 40,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::invalid("c", "must be positive and finite"));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epochs", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub config: SvmConfig,
    /// One weight vector per class.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

impl SvmModel {
    pub fn decision(&self, class: usize, row: &[f64]) -> f64 {
        self.weights[class].iter().zip(row).map(|(w, x)| w * x).sum::<f64>() + self.biases[class]
    }
}

fn train_head(x: &Matrix, y: &[usize], class: usize, cfg: &SvmConfig, seed: u64) -> (Vec<f64>, f64) {
    let n = x.rows();
    let p = x.cols();
    let lambda = 1.0 / (cfg.c * n as f64);
    let radius = 1.0 / lambda.sqrt();
    let mut rng = rng::stream(seed, domain::SVM, class as u64);
    // w[p] is the bias weight on a constant 1 feature.
    let mut w = alloc::vec![0.0; p + 1];
    let mut avg = alloc::vec![0.0; p + 1];
    let mut averaged = 0usize;
    let total = cfg.epochs * n;
    let mut t = 0usize;
    for _ in 0..cfg.epochs {
        for i in rng::permutation(&mut rng, n) {
            t += 1;
            let row = x.row(i);
            let target = if y[i] == class { 1.0 } else { -1.0 };
            let margin = target * (row.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + w[p]);
            let eta = 1.0 / (lambda * t as f64);
            let shrink = 1.0 - eta * lambda;
            w.iter_mut().for_each(|v| *v *= shrink);
            if margin < 1.0 {
                for (wj, xj) in w.iter_mut().zip(row) {
                    *wj += eta * target * xj;
                }
                w[p] += eta * target;
            }
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > radius {
                let s = radius / norm;
                w.iter_mut().for_each(|v| *v *= s);
            }
            if 2 * t > total {
                averaged += 1;
                avg.iter_mut().zip(&w).for_each(|(a, v)| *a += v);
            }
        }
    }
    avg.iter_mut().for_each(|a| *a /= averaged.max(1) as f64);
    let b = avg.pop().unwrap_or(0.0);
    (avg, b)
}

impl Learner for SvmConfig {
    type Model = SvmModel;

    fn fit_with<E: Executor>(
        &self,
        x: &Matrix,
        y: &[usize],
        n_classes: usize,
        seed: u64,
        exec: &E,
    ) -> Result<SvmModel> {
        self.validate()?;
        check_training(x, y, n_classes)?;
        let means_far = (0..x.cols()).any(|f| {
            let col = x.column(f);
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            mean.abs() > 10.0
        });
        if means_far {
            log::warn!("svm: features look unscaled");
        }
        let heads = exec.map(n_classes, |k| train_head(x, y, k, self, seed));
        let (weights, biases) = heads.into_iter().unzip();
        Ok(SvmModel {
            config: self.clone(),
            weights,
            biases,
        })
    }
}

impl Classifier for SvmModel {
    fn n_classes(&self) -> usize {
        self.weights.len()
    }

    fn n_features(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    /// Decision values per class.
    fn scores(&self, row: &[f64]) -> Vec<f64> {
        (0..self.weights.len()).map(|k| self.decision(k, row)).collect()
    }

    /// `sum_k |w_k|` per feature, normalised.
    fn feature_importance(&self) -> Option<Vec<f64>> {
        let mut imp = alloc::vec![0.0; self.n_features()];
        for w in &self.weights {
            imp.iter_mut().zip(w).for_each(|(a, v)| *a += v.abs());
        }
        Some(super::normalize(imp))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn blobs(n: usize) -> (Matrix, Vec<usize>) {
        let mut rng = rng::stream(5, 0, 0);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let c = i % 2;
            let center = if c == 0 { -3.0 } else { 3.0 };
            rows.push([
                center + rng.random_range(-1.0..1.0),
                center + rng.random_range(-1.0..1.0),
            ]);
            y.push(c);
        }
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    fn norm(m: &SvmModel) -> f64 {
        m.weights[0].iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[test]
    fn separable_blobs() {
        let (x, y) = blobs(100);
        let m = SvmConfig {
            c: 10.0,
            ..SvmConfig::default()
        }
        .fit(&x, &y, 2, 1)
        .unwrap();
        assert_eq!(m.predict(&x), y);
        let satisfied = x
            .iter_rows()
            .zip(&y)
            .filter(|(r, &c)| {
                let t = if c == 0 { 1.0 } else { -1.0 };
                t * m.decision(0, r) >= 1.0
            })
            .count();
        assert!(satisfied >= 95, "{satisfied}");
    }

    #[test]
    fn weight_norm_shrinks_with_c() {
        let (x, y) = blobs(100);
        let norms: Vec<f64> = [1.0, 0.1, 0.01]
            .iter()
            .map(|&c| {
                norm(
                    &SvmConfig {
                        c,
                        ..SvmConfig::default()
                    }
                    .fit(&x, &y, 2, 1)
                    .unwrap(),
                )
            })
            .collect();
        assert!(norms[0] > norms[1] && norms[1] > norms[2], "{norms:?}");
    }

    #[test]
    fn xor_is_not_linearly_separable() {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..200 {
            let a = if i % 2 == 0 { 1.0 } else { -1.0 };
            let b = if (i / 2) % 2 == 0 { 1.0 } else { -1.0 };
            rows.push([a, b]);
            y.push(usize::from(a * b > 0.0));
        }
        let x = Matrix::from_rows(&rows).unwrap();
        let m = SvmConfig::default().fit(&x, &y, 2, 0).unwrap();
        let acc = m.predict(&x).iter().zip(&y).filter(|(a, b)| a == b).count() as f64 / 200.0;
        assert!((acc - 0.5).abs() <= 0.25, "{acc}");
    }
}
