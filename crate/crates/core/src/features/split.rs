use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{Dataset, Provenance};
use crate::error::{Error, Result};
use crate::rng::{self, domain};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
    pub stratify: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            test_fraction: 0.2,
            seed: 42,
            stratify: true,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::invalid("test_fraction", "must lie strictly between 0 and 1"));
        }
        Ok(())
    }
}

fn test_count(count: usize, fraction: f64) -> usize {
    ((count as f64 * fraction).round() as usize).clamp(1, count - 1)
}

/// Train and test row indices (both sorted). Only rows flagged `eligible`
/// can land in the test split; the others always train.
pub fn split_indices(
    y: &[usize],
    n_classes: usize,
    eligible: &[bool],
    spec: &SplitSpec,
) -> Result<(Vec<usize>, Vec<usize>)> {
    spec.validate()?;
    let mut test = Vec::new();
    if spec.stratify {
        for c in 0..n_classes {
            let mut rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c && eligible[i]).collect();
            if rows.is_empty() {
                continue;
            }
            if rows.len() < 2 {
                return Err(Error::ClassTooSmall {
                    class: c,
                    count: rows.len(),
                    needed: 2,
                });
            }
            rng::shuffle(&mut rng::stream(spec.seed, domain::SPLIT, c as u64), &mut rows);
            test.extend_from_slice(&rows[..test_count(rows.len(), spec.test_fraction)]);
        }
    } else {
        let mut rows: Vec<usize> = (0..y.len()).filter(|&i| eligible[i]).collect();
        if rows.len() < 2 {
            return Err(Error::Empty("at least two rows are needed to split"));
        }
        rng::shuffle(&mut rng::stream(spec.seed, domain::SPLIT, u64::MAX), &mut rows);
        test.extend_from_slice(&rows[..test_count(rows.len(), spec.test_fraction)]);
    }
    test.sort_unstable();
    let mut in_test = alloc::vec![false; y.len()];
    test.iter().for_each(|&i| in_test[i] = true);
    let train = (0..y.len()).filter(|&i| !in_test[i]).collect();
    Ok((train, test))
}

/// Stratified train / test split. Synthetic rows always stay in training.
pub fn stratified_split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let eligible: Vec<bool> = ds.provenance.iter().map(|&p| p == Provenance::Real).collect();
    let (train, test) = split_indices(&ds.y, ds.n_classes, &eligible, spec)?;
    Ok((ds.select_rows(&train), ds.select_rows(&test)))
}

/// Fold number of every row. Each class is shuffled and dealt round-robin,
/// continuing the deal across classes so fold sizes differ by at most one.
pub fn stratified_folds(y: &[usize], n_classes: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::invalid("folds", "need at least 2 folds"));
    }
    let mut fold = alloc::vec![0; y.len()];
    let mut next = 0;
    for c in 0..n_classes {
        let mut rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
        if rows.is_empty() {
            continue;
        }
        if rows.len() < k {
            return Err(Error::ClassTooSmall {
                class: c,
                count: rows.len(),
                needed: k,
            });
        }
        rng::shuffle(&mut rng::stream(seed, domain::FOLDS, c as u64), &mut rows);
        for r in rows {
            fold[r] = next % k;
            next += 1;
        }
    }
    Ok(fold)
}

/// Splits whole groups (stays): every row of a group lands on the same side.
/// Returns sorted `(train, validation)` row indices.
pub fn group_split(groups: &[i64], fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(
            "validation_fraction",
            "must lie strictly between 0 and 1",
        ));
    }
    let mut ids: Vec<i64> = groups.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() < 2 {
        return Err(Error::Empty("at least two groups are needed to split"));
    }
    rng::shuffle(&mut rng::stream(seed, domain::SPLIT, 0x67), &mut ids);
    let n_val = test_count(ids.len(), fraction);
    let held: BTreeMap<i64, ()> = ids[..n_val].iter().map(|&g| (g, ())).collect();
    let (mut train, mut val) = (Vec::new(), Vec::new());
    for (i, g) in groups.iter().enumerate() {
        if held.contains_key(g) {
            val.push(i);
        } else {
            train.push(i);
        }
    }
    Ok((train, val))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use alloc::string::String;

    fn labels(counts: &[usize]) -> Vec<usize> {
        counts
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| core::iter::repeat_n(c, n))
            .collect()
    }

    fn dataset(counts: &[usize]) -> Dataset {
        let y = labels(counts);
        let x = Matrix::from_vec(y.len(), 1, (0..y.len()).map(|i| i as f64).collect()).unwrap();
        Dataset::new(x, alloc::vec![String::from("i")], y, 3).unwrap()
    }

    #[test]
    fn balanced_split_is_exact() {
        let (train, test) = stratified_split(&dataset(&[100, 100, 100]), &SplitSpec::default()).unwrap();
        assert_eq!(test.class_counts(), [20, 20, 20]);
        assert_eq!(train.class_counts(), [80, 80, 80]);
    }

    #[test]
    fn rounding_audit() {
        let (_, test) = stratified_split(&dataset(&[101, 100, 99]), &SplitSpec::default()).unwrap();
        for (c, n) in test.class_counts().into_iter().enumerate() {
            assert!((19..=21).contains(&n), "class {c}: {n}");
        }
    }

    #[test]
    fn tiny_class_named() {
        match stratified_split(&dataset(&[10, 1, 10]), &SplitSpec::default()) {
            Err(Error::ClassTooSmall { class, .. }) => assert_eq!(class, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn synthetic_rows_stay_in_training() {
        let mut ds = dataset(&[20, 20, 20]);
        for p in ds.provenance.iter_mut().step_by(2) {
            *p = Provenance::Synthetic;
        }
        let (_, test) = stratified_split(&ds, &SplitSpec::default()).unwrap();
        assert_eq!(test.synthetic_count(), 0);
    }

    #[test]
    fn folds_partition_and_balance() {
        let y = labels(&[100, 100, 100]);
        let folds = stratified_folds(&y, 3, 5, 9).unwrap();
        for f in 0..5 {
            for c in 0..3 {
                let n = (0..300).filter(|&i| folds[i] == f && y[i] == c).count();
                assert_eq!(n, 20);
            }
        }
        assert!(stratified_folds(&labels(&[10, 3, 10]), 3, 5, 0).is_err());
    }

    #[test]
    fn groups_stay_together() {
        let groups: Vec<i64> = (0..100).map(|i| i / 7).collect();
        let (train, val) = group_split(&groups, 0.25, 3).unwrap();
        assert_eq!(train.len() + val.len(), 100);
        for &v in &val {
            assert!(train.iter().all(|&t| groups[t] != groups[v]));
        }
    }
}
