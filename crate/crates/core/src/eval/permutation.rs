use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::metrics::{mean_std, Metric};
use crate::classic::Classifier;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::matrix::Matrix;
use crate::rng::{self, domain};

/// Metric drop caused by shuffling one feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Importance {
    pub mean: f64,
    pub std: f64,
}

fn check(n_repeats: usize, rows: usize, labels: usize) -> Result<()> {
    if n_repeats == 0 {
        return Err(Error::invalid("n_repeats", "must be at least 1"));
    }
    if rows != labels {
        return Err(Error::Shape(alloc::format!("{rows} rows but {labels} labels")));
    }
    if rows == 0 {
        return Err(Error::Empty("evaluation rows"));
    }
    Ok(())
}

/// For each column: `baseline - metric` after shuffling that column across
/// rows, over `n_repeats` shuffles. Column `j` draws from stream `j`.
pub fn permutation_importance<C, E>(
    model: &C,
    x: &Matrix,
    y: &[usize],
    metric: Metric,
    n_repeats: usize,
    seed: u64,
    exec: &E,
) -> Result<Vec<Importance>>
where
    C: Classifier + ?Sized,
    E: Executor,
{
    check(n_repeats, x.rows(), y.len())?;
    let k = model.n_classes();
    let baseline = metric.score(y, &model.predict(x), k)?;
    let per_column = exec.map(x.cols(), |j| -> Result<Importance> {
        let mut rng = rng::stream(seed, domain::PERMUTE, j as u64);
        let mut shuffled = x.clone();
        let original = x.column(j);
        let drops = (0..n_repeats)
            .map(|_| {
                let perm = rng::permutation(&mut rng, x.rows());
                for (r, &src) in perm.iter().enumerate() {
                    shuffled.set(r, j, original[src]);
                }
                Ok(baseline - metric.score(y, &model.predict(&shuffled), k)?)
            })
            .collect::<Result<Vec<f64>>>()?;
        let (mean, std) = mean_std(&drops);
        Ok(Importance { mean, std })
    });
    per_column.into_iter().collect()
}

/// Channel importance for window classifiers: a repeat draws one permutation
/// of the samples and replaces channel `c` of every sample with that of its
/// permuted partner, time step by time step.
#[allow(clippy::too_many_arguments)]
pub fn sequence_permutation_importance<P, E>(
    predict: P,
    samples: &[Matrix],
    y: &[usize],
    n_classes: usize,
    metric: Metric,
    n_repeats: usize,
    seed: u64,
    exec: &E,
) -> Result<Vec<Importance>>
where
    P: Fn(&[Matrix]) -> Result<Vec<usize>> + Sync + Send,
    E: Executor,
{
    check(n_repeats, samples.len(), y.len())?;
    let channels = samples[0].cols();
    let baseline = metric.score(y, &predict(samples)?, n_classes)?;
    let per_channel = exec.map(channels, |c| -> Result<Importance> {
        let mut rng = rng::stream(seed, domain::PERMUTE, c as u64);
        let mut shuffled = samples.to_vec();
        let drops = (0..n_repeats)
            .map(|_| {
                let perm = rng::permutation(&mut rng, samples.len());
                for (i, &src) in perm.iter().enumerate() {
                    for t in 0..samples[i].rows() {
                        shuffled[i].set(t, c, samples[src].get(t, c));
                    }
                }
                Ok(baseline - metric.score(y, &predict(&shuffled)?, n_classes)?)
            })
            .collect::<Result<Vec<f64>>>()?;
        let (mean, std) = mean_std(&drops);
        Ok(Importance { mean, std })
    });
    per_channel.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classic::{Learner, TreeConfig};
    use crate::exec::Sequential;
    use rand::Rng;

    fn planted(n: usize, seed: u64) -> (Matrix, Vec<usize>) {
        let mut rng = rng::stream(seed, 0, 0);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let r: [f64; 3] = core::array::from_fn(|_| rng.random_range(-1.0..1.0));
            y.push(usize::from(r[1] > 0.0));
            rows.push(r);
        }
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn unused_column_scores_zero() {
        let (x, y) = planted(200, 4);
        let tree = TreeConfig {
            max_depth: Some(1),
            ..TreeConfig::default()
        }
        .fit(&x, &y, 2, 0)
        .unwrap();
        let imp = permutation_importance(&tree, &x, &y, Metric::Accuracy, 5, 7, &Sequential).unwrap();
        assert_eq!(imp[0], Importance { mean: 0.0, std: 0.0 });
        assert_eq!(imp[2], Importance { mean: 0.0, std: 0.0 });
        assert!(imp[1].mean > 0.3);
        let again = permutation_importance(&tree, &x, &y, Metric::Accuracy, 5, 7, &Sequential).unwrap();
        assert_eq!(imp, again);
    }

    #[test]
    fn sequence_channels() {
        let mut rng = rng::stream(2, 0, 0);
        let samples: Vec<Matrix> = (0..60)
            .map(|_| Matrix::from_vec(4, 2, (0..8).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap())
            .collect();
        let predict = |s: &[Matrix]| -> Result<Vec<usize>> {
            Ok(s.iter()
                .map(|m| usize::from(m.column(0).iter().sum::<f64>() > 0.0))
                .collect())
        };
        let y = predict(&samples).unwrap();
        let imp =
            sequence_permutation_importance(predict, &samples, &y, 2, Metric::Accuracy, 3, 1, &Sequential).unwrap();
        assert!(imp[0].mean > 0.2);
        assert_eq!(imp[1].mean, 0.0);
    }
}
