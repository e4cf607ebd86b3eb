use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts indexed `[true class][predicted class]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Result<ConfusionMatrix> {
        if y_true.len() != y_pred.len() {
            return Err(Error::Shape(format!(
                "{} true labels but {} predictions",
                y_true.len(),
                y_pred.len()
            )));
        }
        if y_true.is_empty() {
            return Err(Error::Empty("labels"));
        }
        let mut counts = alloc::vec![alloc::vec![0; n_classes]; n_classes];
        for (&t, &p) in y_true.iter().zip(y_pred) {
            if t >= n_classes || p >= n_classes {
                return Err(Error::invalid("labels", format!("label outside 0..{n_classes}")));
            }
            counts[t][p] += 1;
        }
        Ok(ConfusionMatrix { counts })
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn tp(&self, c: usize) -> usize {
        self.counts[c][c]
    }

    pub fn fp(&self, c: usize) -> usize {
        (0..self.n_classes())
            .filter(|&t| t != c)
            .map(|t| self.counts[t][c])
            .sum()
    }

    pub fn fn_(&self, c: usize) -> usize {
        (0..self.n_classes())
            .filter(|&p| p != c)
            .map(|p| self.counts[c][p])
            .sum()
    }

    pub fn support(&self, c: usize) -> usize {
        self.counts[c].iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    /// Unweighted mean over classes.
    pub macro_avg: Averages,
    /// Mean over classes weighted by their share of the true labels.
    pub weighted: Averages,
    /// From counts pooled over classes.
    pub micro: Averages,
    /// Quantities whose denominator was zero and were reported as 0.
    pub zero_division: Vec<String>,
}

fn ratio(num: usize, den: usize, what: &str, notes: &mut Vec<String>) -> f64 {
    if den == 0 {
        notes.push(String::from(what));
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Accuracy, per-class precision / recall / F1 and their macro, weighted and micro averages.
pub fn compute_metrics(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Result<MetricsReport> {
    let cm = ConfusionMatrix::new(y_true, y_pred, n_classes)?;
    let total = cm.total();
    let mut notes = Vec::new();
    let per_class: Vec<ClassMetrics> = (0..n_classes)
        .map(|c| {
            let precision = ratio(cm.tp(c), cm.tp(c) + cm.fp(c), &format!("precision[{c}]"), &mut notes);
            let recall = ratio(cm.tp(c), cm.tp(c) + cm.fn_(c), &format!("recall[{c}]"), &mut notes);
            ClassMetrics {
                precision,
                recall,
                f1: harmonic(precision, recall),
                support: cm.support(c),
            }
        })
        .collect();
    let k = n_classes as f64;
    let macro_avg = Averages {
        precision: per_class.iter().map(|m| m.precision).sum::<f64>() / k,
        recall: per_class.iter().map(|m| m.recall).sum::<f64>() / k,
        f1: per_class.iter().map(|m| m.f1).sum::<f64>() / k,
    };
    let w = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(|m| f(m) * m.support as f64).sum::<f64>() / total as f64;
    let weighted = Averages {
        precision: w(|m| m.precision),
        recall: w(|m| m.recall),
        f1: w(|m| m.f1),
    };
    let tp: usize = (0..n_classes).map(|c| cm.tp(c)).sum();
    let fp: usize = (0..n_classes).map(|c| cm.fp(c)).sum();
    let fn_: usize = (0..n_classes).map(|c| cm.fn_(c)).sum();
    let mp = ratio(tp, tp + fp, "micro precision", &mut notes);
    let mr = ratio(tp, tp + fn_, "micro recall", &mut notes);
    Ok(MetricsReport {
        accuracy: tp as f64 / total as f64,
        confusion: cm,
        per_class,
        macro_avg,
        weighted,
        micro: Averages {
            precision: mp,
            recall: mr,
            f1: harmonic(mp, mr),
        },
        zero_division: notes,
    })
}

/// Scalar summaries usable as search objectives or importance metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    MacroF1,
    WeightedF1,
    MicroF1,
    MacroPrecision,
    MacroRecall,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Accuracy,
        Metric::MacroF1,
        Metric::WeightedF1,
        Metric::MicroF1,
        Metric::MacroPrecision,
        Metric::MacroRecall,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::MacroF1 => "macro_f1",
            Metric::WeightedF1 => "weighted_f1",
            Metric::MicroF1 => "micro_f1",
            Metric::MacroPrecision => "macro_precision",
            Metric::MacroRecall => "macro_recall",
        }
    }

    pub fn parse(name: &str) -> Result<Metric> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == name)
            .ok_or_else(|| Error::UnknownMetric(String::from(name)))
    }

    pub fn of(self, r: &MetricsReport) -> f64 {
        match self {
            Metric::Accuracy => r.accuracy,
            Metric::MacroF1 => r.macro_avg.f1,
            Metric::WeightedF1 => r.weighted.f1,
            Metric::MicroF1 => r.micro.f1,
            Metric::MacroPrecision => r.macro_avg.precision,
            Metric::MacroRecall => r.macro_avg.recall,
        }
    }

    pub fn score(self, y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Result<f64> {
        Ok(self.of(&compute_metrics(y_true, y_pred, n_classes)?))
    }
}

/// Mean and population standard deviation.
pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_tallied_example() {
        let r = compute_metrics(&[0, 0, 1, 1, 2, 2], &[0, 1, 1, 2, 2, 0], 3).unwrap();
        assert_eq!(r.accuracy, 0.5);
        for m in &r.per_class {
            assert_eq!((m.precision, m.recall, m.f1), (0.5, 0.5, 0.5));
        }
        assert_eq!(r.macro_avg.f1, 0.5);
        assert!(r.zero_division.is_empty());
    }

    #[test]
    fn perfect_prediction() {
        let y = [0, 1, 2, 2, 1];
        let r = compute_metrics(&y, &y, 3).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.macro_avg.f1, 1.0);
        assert_eq!(r.weighted.f1, 1.0);
    }

    #[test]
    fn zero_division_is_flagged() {
        let r = compute_metrics(&[0, 0, 1], &[0, 0, 0], 3).unwrap();
        assert_eq!(r.per_class[2].precision, 0.0);
        assert!(r.zero_division.iter().any(|n| n == "precision[2]"));
        assert!(r.zero_division.iter().any(|n| n == "recall[2]"));
    }

    #[test]
    fn errors() {
        assert!(compute_metrics(&[0, 1], &[0], 3).is_err());
        assert!(compute_metrics(&[], &[], 3).is_err());
        assert_eq!(Metric::parse("auc"), Err(Error::UnknownMetric(String::from("auc"))));
        assert_eq!(Metric::parse("macro_f1"), Ok(Metric::MacroF1));
    }

    proptest! {
        #[test]
        fn micro_equals_accuracy(pairs in proptest::collection::vec((0usize..3, 0usize..3), 1..200)) {
            let (t, p): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
            let r = compute_metrics(&t, &p, 3).unwrap();
            prop_assert_eq!(r.micro.precision, r.accuracy);
            prop_assert_eq!(r.micro.recall, r.accuracy);
        }

        #[test]
        fn macro_f1_invariant_under_relabeling(pairs in proptest::collection::vec((0usize..3, 0usize..3), 1..100)) {
            let (t, p): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
            let perm = [2, 0, 1];
            let t2: Vec<usize> = t.iter().map(|&c| perm[c]).collect();
            let p2: Vec<usize> = p.iter().map(|&c| perm[c]).collect();
            let a = compute_metrics(&t, &p, 3).unwrap().macro_avg.f1;
            let b = compute_metrics(&t2, &p2, 3).unwrap().macro_avg.f1;
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn weighted_equals_macro_when_balanced(preds in proptest::collection::vec(0usize..3, 30)) {
            let t: Vec<usize> = (0..30).map(|i| i % 3).collect();
            let r = compute_metrics(&t, &preds, 3).unwrap();
            prop_assert!((r.weighted.f1 - r.macro_avg.f1).abs() < 1e-12);
        }
    }
}
