//! Small generators with a known answer, for checking learners and selectors.

use alloc::format;
use alloc::vec::Vec;
use num_traits::Float;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::matrix::Matrix;
use crate::rng::{self, domain};
use crate::seq::WindowSample;
use rand::Rng;

/// Standard normal quantile at 2/3.
const TERTILE_Z: f64 = 0.430_727_3;

/// `n` rows of `n_features` standard normal columns. The class is the tertile
/// of `sum(x[0..informative]) / sqrt(informative) + noise * e`, so the first
/// `informative` columns carry all of the signal and the classes are balanced
/// in expectation.
pub fn planted_tabular(n: usize, n_features: usize, informative: usize, noise: f64, seed: u64) -> Result<Dataset> {
    if informative == 0 || informative > n_features {
        return Err(Error::invalid("informative", "must be in 1..=n_features"));
    }
    if !(noise >= 0.0) {
        return Err(Error::invalid("noise", "must be non-negative"));
    }
    let mut rng = rng::stream(seed, domain::PLANTED, 0);
    let threshold = TERTILE_Z * (1.0 + noise * noise).sqrt();
    let mut data = Vec::with_capacity(n * n_features);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let start = data.len();
        data.extend((0..n_features).map(|_| -> f64 { StandardNormal.sample(&mut rng) }));
        let e: f64 = StandardNormal.sample(&mut rng);
        let signal = data[start..start + informative].iter().sum::<f64>() / (informative as f64).sqrt() + noise * e;
        y.push(if signal < -threshold {
            0
        } else if signal <= threshold {
            1
        } else {
            2
        });
    }
    let columns = (0..n_features).map(|j| format!("f{j:02}")).collect();
    Dataset::new(Matrix::from_vec(n, n_features, data)?, columns, y, 3)
}

/// `n` windows of `window x channels` standard normal noise with class `c`
/// drawn uniformly and channel 0 shifted by `(c - 1) * separation`. Each
/// sample is its own stay. The Bayes rule thresholds the channel-0 mean at
/// `±separation / 2`.
pub fn planted_windows(
    n: usize,
    window: usize,
    channels: usize,
    separation: f64,
    seed: u64,
) -> Result<Vec<WindowSample>> {
    if window == 0 || channels == 0 {
        return Err(Error::invalid("window", "window and channel counts must be positive"));
    }
    if !separation.is_finite() {
        return Err(Error::invalid("separation", "must be finite"));
    }
    (0..n)
        .map(|i| {
            let mut rng = rng::stream(seed, domain::PLANTED, 1 + i as u64);
            let label = rng.random_range(0..3usize);
            let shift = (label as f64 - 1.0) * separation;
            let data = (0..window * channels)
                .map(|k| {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    if k % channels == 0 {
                        e + shift
                    } else {
                        e
                    }
                })
                .collect();
            Ok(WindowSample {
                x: Matrix::from_vec(window, channels, data)?,
                label,
                stay_id: i as i64,
                start: 0,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classes_are_roughly_balanced() {
        let ds = planted_tabular(3000, 6, 2, 0.5, 1).unwrap();
        for c in ds.class_counts() {
            assert!((c as f64 / 3000.0 - 1.0 / 3.0).abs() < 0.04, "{c}");
        }
        assert_eq!(ds, planted_tabular(3000, 6, 2, 0.5, 1).unwrap());
    }

    #[test]
    fn signal_lives_in_informative_columns() {
        let ds = planted_tabular(2000, 4, 1, 0.0, 2).unwrap();
        let mean_of = |c: usize, j: usize| {
            let v: Vec<f64> = (0..ds.len())
                .filter(|&i| ds.y[i] == c)
                .map(|i| ds.x.get(i, j))
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        assert!(mean_of(2, 0) - mean_of(0, 0) > 2.0);
        assert!((mean_of(2, 3) - mean_of(0, 3)).abs() < 0.2);
    }

    #[test]
    fn window_bayes_rule_is_accurate() {
        // Channel-0 mean over 16 rows has sd 1/4, so thresholds at ±0.75 misclassify ~0.3% of samples.
        let w = planted_windows(600, 16, 3, 1.5, 5).unwrap();
        let hits = w
            .iter()
            .filter(|s| {
                let m = s.x.column(0).iter().sum::<f64>() / 16.0;
                let guess = if m < -0.75 {
                    0
                } else if m <= 0.75 {
                    1
                } else {
                    2
                };
                guess == s.label
            })
            .count();
        assert!(hits >= 590, "{hits}");
    }
}
