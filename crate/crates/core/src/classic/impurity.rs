use alloc::vec::Vec;
use num_traits::Float;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    #[default]
    Gini,
    Entropy,
}

/// Class counts (possibly weighted) at a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDistribution {
    pub counts: Vec<f64>,
}

impl ClassDistribution {
    pub fn new(counts: Vec<f64>) -> Self {
        ClassDistribution { counts }
    }

    pub fn from_labels(labels: impl IntoIterator<Item = usize>, n_classes: usize) -> Self {
        let mut counts = alloc::vec![0.0; n_classes];
        for c in labels {
            counts[c] += 1.0;
        }
        ClassDistribution { counts }
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Class probabilities; an empty distribution is uniform.
    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.total();
        let k = self.counts.len() as f64;
        self.counts
            .iter()
            .map(|&c| if total > 0.0 { c / total } else { 1.0 / k })
            .collect()
    }
}

/// `1 - sum p_i^2`.
pub fn gini(p: &[f64]) -> f64 {
    1.0 - p.iter().map(|x| x * x).sum::<f64>()
}

/// `-sum p_i log2 p_i`, with `0 log 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

pub fn impurity(dist: &ClassDistribution, criterion: Criterion) -> f64 {
    counts_impurity(&dist.counts, criterion)
}

pub(crate) fn counts_impurity(counts: &[f64], criterion: Criterion) -> f64 {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    match criterion {
        Criterion::Gini => 1.0 - counts.iter().map(|&c| (c / total) * (c / total)).sum::<f64>(),
        Criterion::Entropy => -counts
            .iter()
            .filter(|&&c| c > 0.0)
            .map(|&c| {
                let p = c / total;
                p * p.log2()
            })
            .sum::<f64>(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn both(p: &[f64]) -> (f64, f64) {
        let d = ClassDistribution::new(p.to_vec());
        (impurity(&d, Criterion::Gini), impurity(&d, Criterion::Entropy))
    }

    #[test]
    fn reference_values() {
        assert_eq!(both(&[1.0, 0.0, 0.0]), (0.0, 0.0));
        let (g, e) = both(&[0.5, 0.5, 0.0]);
        assert!((g - 0.5).abs() < 1e-15 && (e - 1.0).abs() < 1e-15);
        let (g, e) = both(&[1.0, 1.0, 1.0]);
        assert!((g - 2.0 / 3.0).abs() < 1e-15);
        assert!((e - 3f64.log2()).abs() < 1e-12);
        assert!((e - 1.58496).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn bounded_by_uniform(a in 0.0f64..10.0, b in 0.0f64..10.0, c in 0.0f64..10.0) {
            prop_assume!(a + b + c > 1e-9);
            let (g, e) = both(&[a, b, c]);
            prop_assert!((-1e-12..=2.0 / 3.0 + 1e-12).contains(&g));
            prop_assert!(e >= -1e-12 && e <= 3f64.log2() + 1e-12);
            let pure = [a, b, c].iter().filter(|&&x| x > 0.0).count() == 1;
            prop_assert_eq!(pure, g.abs() < 1e-15);
        }
    }
}
