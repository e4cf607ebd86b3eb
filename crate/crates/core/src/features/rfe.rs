use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{smote_oversample, Dataset, Provenance};
use crate::classic::{Classifier, Learner, ModelSpec};
use crate::error::{Error, Result};
use crate::eval::cross_validate;
use crate::exec::Executor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfeConfig {
    pub step_k: usize,
    /// Smallest feature count to evaluate; defaults to 1.
    pub min_features: Option<usize>,
    /// Largest feature count to evaluate; defaults to all columns.
    pub max_features: Option<usize>,
    pub cv_folds: usize,
    pub seed: u64,
    /// SMOTE neighbour count applied inside every fit, or `None` for no oversampling.
    pub smote: Option<usize>,
}

impl Default for RfeConfig {
    fn default() -> Self {
        RfeConfig {
            step_k: 10,
            min_features: None,
            max_features: None,
            cv_folds: 5,
            seed: 42,
            smote: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfeStep {
    pub step: usize,
    pub n_features: usize,
    pub columns: Vec<usize>,
    pub macro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfeResult {
    /// Column indices into the input dataset, ascending.
    pub selected: Vec<usize>,
    pub names: Vec<String>,
    pub trace: Vec<RfeStep>,
}

/// Recursive feature elimination. Each step fits `spec` on the current
/// columns, drops the `step_k` with the lowest importance and, while the
/// feature count is inside the target range, records the cross-validated
/// macro F1. The best recorded set wins; ties go to the smaller set.
pub fn rfe_select<E: Executor>(train: &Dataset, spec: &ModelSpec, cfg: &RfeConfig, exec: &E) -> Result<RfeResult> {
    if !spec.has_importance() {
        return Err(Error::UnsupportedModel(String::from(spec.name())));
    }
    let p = train.x.cols();
    let min = cfg.min_features.unwrap_or(1);
    let max = cfg.max_features.unwrap_or(p);
    if cfg.step_k == 0 || cfg.step_k >= p {
        return Err(Error::invalid("step_k", alloc::format!("must be in 1..{p}")));
    }
    if min == 0 || min > max || max > p {
        return Err(Error::invalid(
            "target_range",
            alloc::format!("need 1 <= min <= max <= {p}"),
        ));
    }
    let real: Vec<usize> = (0..train.len())
        .filter(|&i| train.provenance[i] == Provenance::Real)
        .collect();
    let train = train.select_rows(&real);
    let mut columns: Vec<usize> = (0..p).collect();
    let mut trace = Vec::new();
    for step in 0.. {
        let current = train.select_columns(&columns);
        if (min..=max).contains(&columns.len()) {
            let cv = cross_validate(&current, spec, cfg.cv_folds, cfg.seed, cfg.smote, exec)?;
            trace.push(RfeStep {
                step,
                n_features: columns.len(),
                columns: columns.clone(),
                macro_f1: cv.macro_f1.mean,
            });
        }
        if columns.len() < min + cfg.step_k {
            break;
        }
        let fit_on = match cfg.smote {
            Some(k) => smote_oversample(&current, k, cfg.seed.wrapping_add(step as u64))?.dataset,
            None => current,
        };
        let model = spec.fit_with(
            &fit_on.x,
            &fit_on.y,
            fit_on.n_classes,
            cfg.seed.wrapping_add(step as u64),
            exec,
        )?;
        let importance = model
            .feature_importance()
            .ok_or_else(|| Error::UnsupportedModel(String::from(spec.name())))?;
        let mut order: Vec<usize> = (0..columns.len()).collect();
        order.sort_by(|&a, &b| importance[a].total_cmp(&importance[b]).then(a.cmp(&b)));
        let mut drop = order[..cfg.step_k].to_vec();
        drop.sort_unstable();
        columns = columns
            .iter()
            .enumerate()
            .filter(|(i, _)| drop.binary_search(i).is_err())
            .map(|(_, &c)| c)
            .collect();
    }
    let mut best: Option<&RfeStep> = None;
    for s in &trace {
        if !s.macro_f1.is_finite() {
            return Err(Error::invalid(
                "macro_f1",
                "cross-validation produced a non-finite score",
            ));
        }
        if best.is_none_or(|b| s.macro_f1 >= b.macro_f1) {
            best = Some(s);
        }
    }
    let best = best.ok_or_else(|| {
        Error::invalid(
            "target_range",
            "no feature count in range is reachable with this step_k",
        )
    })?;
    Ok(RfeResult {
        selected: best.columns.clone(),
        names: best.columns.iter().map(|&c| train.columns[c].clone()).collect(),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classic::{ForestConfig, KnnConfig};
    use crate::exec::Sequential;
    use crate::synthgen::planted_tabular;

    fn small_forest() -> ModelSpec {
        ModelSpec::Forest(ForestConfig {
            n_estimators: 30,
            ..ForestConfig::default()
        })
    }

    #[test]
    fn elimination_arithmetic() {
        let ds = planted_tabular(150, 20, 5, 0.3, 3).unwrap();
        let cfg = RfeConfig {
            step_k: 10,
            min_features: Some(10),
            cv_folds: 3,
            ..RfeConfig::default()
        };
        let r = rfe_select(&ds, &small_forest(), &cfg, &Sequential).unwrap();
        let sizes: Vec<usize> = r.trace.iter().map(|s| s.n_features).collect();
        assert_eq!(sizes, [20, 10]);
        let best = r.trace.iter().map(|s| s.macro_f1).fold(f64::MIN, f64::max);
        let chosen = r.trace.iter().find(|s| s.columns == r.selected).unwrap();
        assert_eq!(chosen.macro_f1, best);
    }

    #[test]
    fn knn_and_bad_steps_are_rejected() {
        let ds = planted_tabular(60, 20, 5, 0.3, 3).unwrap();
        let knn = ModelSpec::Knn(KnnConfig::default());
        assert!(matches!(
            rfe_select(&ds, &knn, &RfeConfig::default(), &Sequential),
            Err(Error::UnsupportedModel(_))
        ));
        let cfg = RfeConfig {
            step_k: 20,
            ..RfeConfig::default()
        };
        assert!(rfe_select(&ds, &small_forest(), &cfg, &Sequential).is_err());
    }
}
