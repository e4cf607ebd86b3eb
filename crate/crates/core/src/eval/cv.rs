use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, mean_std, MetricsReport};
use crate::classic::{Classifier, Learner};
use crate::error::Result;
use crate::exec::{Executor, Sequential};
use crate::features::{smote_oversample, stratified_folds, Dataset, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub folds: Vec<MetricsReport>,
    pub accuracy: FoldScore,
    pub macro_f1: FoldScore,
    pub weighted_f1: FoldScore,
}

/// Stratified k-fold cross-validation over the real rows of `ds`. With
/// `smote = Some(k)` each training fold is oversampled on its own. Folds run
/// on `exec`; each fold fits sequentially with seed `seed + fold`.
pub fn cross_validate<L, E>(
    ds: &Dataset,
    learner: &L,
    k: usize,
    seed: u64,
    smote: Option<usize>,
    exec: &E,
) -> Result<CvResult>
where
    L: Learner + Sync,
    E: Executor,
{
    let real: Vec<usize> = (0..ds.len())
        .filter(|&i| ds.provenance[i] == Provenance::Real)
        .collect();
    let ds = ds.select_rows(&real);
    let folds = stratified_folds(&ds.y, ds.n_classes, k, seed)?;
    let reports = exec.map(k, |f| -> Result<MetricsReport> {
        let train: Vec<usize> = (0..ds.len()).filter(|&i| folds[i] != f).collect();
        let test: Vec<usize> = (0..ds.len()).filter(|&i| folds[i] == f).collect();
        let mut tr = ds.select_rows(&train);
        if let Some(kn) = smote {
            tr = smote_oversample(&tr, kn, seed.wrapping_add(f as u64))?.dataset;
        }
        let te = ds.select_rows(&test);
        let model = learner.fit_with(&tr.x, &tr.y, ds.n_classes, seed.wrapping_add(f as u64), &Sequential)?;
        compute_metrics(&te.y, &model.predict(&te.x), ds.n_classes)
    });
    let folds: Vec<MetricsReport> = reports.into_iter().collect::<Result<_>>()?;
    let summary = |f: fn(&MetricsReport) -> f64| {
        let v: Vec<f64> = folds.iter().map(f).collect();
        let (mean, std) = mean_std(&v);
        FoldScore { mean, std }
    };
    Ok(CvResult {
        accuracy: summary(|r| r.accuracy),
        macro_f1: summary(|r| r.macro_avg.f1),
        weighted_f1: summary(|r| r.weighted.f1),
        folds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::matrix::Matrix;
    use alloc::string::String;

    /// Always predicts the training majority.
    struct Majority;
    struct Constant(usize, usize);

    impl Classifier for Constant {
        fn n_classes(&self) -> usize {
            self.1
        }
        fn n_features(&self) -> usize {
            0
        }
        fn scores(&self, _: &[f64]) -> Vec<f64> {
            (0..self.1).map(|c| f64::from(u8::from(c == self.0))).collect()
        }
    }

    impl Learner for Majority {
        type Model = Constant;
        fn fit_with<E: Executor>(&self, _: &Matrix, y: &[usize], n: usize, _: u64, _: &E) -> Result<Constant> {
            let mut counts = alloc::vec![0.0; n];
            y.iter().for_each(|&c| counts[c] += 1.0);
            Ok(Constant(crate::classic::argmax(&counts), n))
        }
    }

    fn dataset(counts: &[usize]) -> Dataset {
        let y: Vec<usize> = counts
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| core::iter::repeat_n(c, n))
            .collect();
        let x = Matrix::zeros(y.len(), 1);
        Dataset::new(x, alloc::vec![String::from("z")], y, 3).unwrap()
    }

    #[test]
    fn majority_baseline_per_fold() {
        let cv = cross_validate(&dataset(&[60, 30, 10]), &Majority, 5, 1, None, &Sequential).unwrap();
        for f in &cv.folds {
            assert_eq!(f.confusion.total(), 20);
            assert!((f.accuracy - 0.6).abs() < 1e-12);
        }
        assert!(cv.accuracy.std.abs() < 1e-12);
    }

    #[test]
    fn smote_inside_folds() {
        let cv = cross_validate(&dataset(&[60, 30, 30]), &Majority, 5, 1, Some(3), &Sequential).unwrap();
        // Balanced training folds make the majority learner fall back to class 0.
        assert!((cv.accuracy.mean - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fold_larger_than_class() {
        assert!(matches!(
            cross_validate(&dataset(&[60, 3, 30]), &Majority, 5, 1, None, &Sequential),
            Err(Error::ClassTooSmall { class: 1, .. })
        ));
    }
}
