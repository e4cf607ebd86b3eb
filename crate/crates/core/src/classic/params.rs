use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{
    BoostConfig, Criterion, DistanceMetric, ForestConfig, Growth, Kernel, KnnConfig, MaxFeatures, ModelSpec, SvmConfig,
    Weighting,
};
use crate::error::{Error, Result};

/// A hyperparameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Bool(bool),
    Int(i64),
    Real(f64),
    Text(String),
}

impl core::fmt::Display for ParamValue {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ParamValue::Bool(v) => write!(f, "{v}"),
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Real(v) => write!(f, "{v}"),
            ParamValue::Text(v) => f.write_str(v),
        }
    }
}

pub type Params = BTreeMap<String, ParamValue>;

/// Classical model families addressable from configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Knn,
    Svm,
    Forest,
    BoostDepthwise,
    BoostOblivious,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Knn,
        ModelKind::Svm,
        ModelKind::Forest,
        ModelKind::BoostDepthwise,
        ModelKind::BoostOblivious,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Knn => "knn",
            ModelKind::Svm => "svm",
            ModelKind::Forest => "forest",
            ModelKind::BoostDepthwise => "boost-depthwise",
            ModelKind::BoostOblivious => "boost-oblivious",
        }
    }

    pub fn parse(name: &str) -> Option<ModelKind> {
        ModelKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

struct Reader<'a> {
    params: BTreeMap<&'a str, &'a ParamValue>,
}

impl<'a> Reader<'a> {
    fn take(&mut self, name: &str) -> Option<&'a ParamValue> {
        self.params.remove(name)
    }

    fn int(&mut self, name: &str, min: i64) -> Result<Option<usize>> {
        match self.take(name) {
            None => Ok(None),
            Some(ParamValue::Int(v)) if *v >= min => Ok(Some(*v as usize)),
            Some(ParamValue::Real(v)) if v.fract() == 0.0 && *v >= min as f64 => Ok(Some(*v as usize)),
            Some(v) => Err(Error::invalid(name, format!("expected an integer >= {min}, got {v}"))),
        }
    }

    fn real(&mut self, name: &str) -> Result<Option<f64>> {
        match self.take(name) {
            None => Ok(None),
            Some(ParamValue::Int(v)) => Ok(Some(*v as f64)),
            Some(ParamValue::Real(v)) => Ok(Some(*v)),
            Some(v) => Err(Error::invalid(name, format!("expected a number, got {v}"))),
        }
    }

    fn flag(&mut self, name: &str) -> Result<Option<bool>> {
        match self.take(name) {
            None => Ok(None),
            Some(ParamValue::Bool(v)) => Ok(Some(*v)),
            Some(v) => Err(Error::invalid(name, format!("expected true or false, got {v}"))),
        }
    }

    fn choice<T: Copy>(&mut self, name: &str, options: &[(&str, T)]) -> Result<Option<T>> {
        match self.take(name) {
            None => Ok(None),
            Some(ParamValue::Text(s)) => options
                .iter()
                .find(|(k, _)| k == s)
                .map(|&(_, v)| Some(v))
                .ok_or_else(|| {
                    let names: alloc::vec::Vec<&str> = options.iter().map(|(k, _)| *k).collect();
                    Error::invalid(name, format!("`{s}` is not one of {}", names.join(", ")))
                }),
            Some(v) => Err(Error::invalid(name, format!("expected a string, got {v}"))),
        }
    }

    fn finish(self, kind: ModelKind) -> Result<()> {
        match self.params.keys().next() {
            None => Ok(()),
            Some(name) => Err(Error::invalid(
                name.to_string(),
                format!("unknown hyperparameter for {}", kind.name()),
            )),
        }
    }
}

fn set<T>(target: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *target = v;
    }
}

pub(super) fn build(kind: ModelKind, params: &Params) -> Result<ModelSpec> {
    let mut r = Reader {
        params: params.iter().map(|(k, v)| (k.as_str(), v)).collect(),
    };
    let spec = match kind {
        ModelKind::Knn => {
            let mut c = KnnConfig::default();
            set(&mut c.k, r.int("n_neighbors", 1)?);
            set(
                &mut c.weighting,
                r.choice(
                    "weights",
                    &[("uniform", Weighting::Uniform), ("distance", Weighting::Distance)],
                )?,
            );
            set(
                &mut c.metric,
                r.choice(
                    "metric",
                    &[
                        ("euclidean", DistanceMetric::Euclidean),
                        ("manhattan", DistanceMetric::Manhattan),
                    ],
                )?,
            );
            ModelSpec::Knn(c)
        }
        ModelKind::Svm => {
            let mut c = SvmConfig::default();
            set(&mut c.c, r.real("c")?);
            set(&mut c.kernel, r.choice("kernel", &[("linear", Kernel::Linear)])?);
            set(&mut c.epochs, r.int("epochs", 1)?);
            // Shape settings of non-linear kernels: checked, then unused by the linear kernel.
            match r.take("gamma") {
                None => {}
                Some(ParamValue::Text(t)) if t == "scale" || t == "auto" => {}
                Some(ParamValue::Real(g)) if *g > 0.0 => {}
                Some(v) => {
                    return Err(Error::invalid(
                        "gamma",
                        format!("expected `scale`, `auto` or a positive number, got {v}"),
                    ))
                }
            }
            r.int("degree", 1)?;
            ModelSpec::Svm(c)
        }
        ModelKind::Forest => {
            let mut c = ForestConfig::default();
            set(&mut c.n_estimators, r.int("n_estimators", 1)?);
            if let Some(d) = r.int("max_depth", 1)? {
                c.tree.max_depth = Some(d);
            }
            set(&mut c.tree.min_samples_split, r.int("min_samples_split", 2)?);
            set(&mut c.tree.min_samples_leaf, r.int("min_samples_leaf", 1)?);
            set(
                &mut c.tree.max_features,
                r.choice(
                    "max_features",
                    &[
                        ("sqrt", MaxFeatures::Sqrt),
                        ("log2", MaxFeatures::Log2),
                        ("all", MaxFeatures::All),
                    ],
                )?,
            );
            set(
                &mut c.tree.criterion,
                r.choice(
                    "criterion",
                    &[("gini", Criterion::Gini), ("entropy", Criterion::Entropy)],
                )?,
            );
            set(&mut c.bootstrap, r.flag("bootstrap")?);
            ModelSpec::Forest(c)
        }
        ModelKind::BoostDepthwise => {
            let mut c = BoostConfig::default();
            set(&mut c.n_rounds, r.int("n_estimators", 1)?);
            set(&mut c.max_depth, r.int("max_depth", 1)?);
            set(&mut c.learning_rate, r.real("learning_rate")?);
            set(&mut c.subsample, r.real("subsample")?);
            set(&mut c.colsample_bytree, r.real("colsample_bytree")?);
            set(&mut c.gamma, r.real("gamma")?);
            set(&mut c.alpha, r.real("reg_alpha")?);
            set(&mut c.lambda, r.real("reg_lambda")?);
            set(&mut c.min_child_weight, r.real("min_child_weight")?);
            set(&mut c.max_bins, r.int("max_bin", 2)?);
            ModelSpec::Boost(c)
        }
        ModelKind::BoostOblivious => {
            let mut c = BoostConfig {
                growth: Growth::Oblivious,
                lambda: 3.0,
                min_child_weight: 0.0,
                max_bins: 254,
                bagging_temperature: 1.0,
                random_strength: 1.0,
                ..BoostConfig::default()
            };
            set(&mut c.n_rounds, r.int("iterations", 1)?);
            set(&mut c.max_depth, r.int("depth", 1)?);
            set(&mut c.learning_rate, r.real("learning_rate")?);
            set(&mut c.lambda, r.real("l2_leaf_reg")?);
            set(&mut c.max_bins, r.int("border_count", 2)?);
            set(&mut c.bagging_temperature, r.real("bagging_temperature")?);
            set(&mut c.random_strength, r.real("random_strength")?);
            set(&mut c.subsample, r.real("subsample")?);
            ModelSpec::Boost(c)
        }
    };
    r.finish(kind)?;
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(items: &[(&str, ParamValue)]) -> Params {
        items.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn maps_named_parameters() {
        let spec = ModelSpec::from_params(
            ModelKind::BoostOblivious,
            &params(&[
                ("iterations", ParamValue::Int(1415)),
                ("depth", ParamValue::Int(6)),
                ("learning_rate", ParamValue::Real(0.1342)),
                ("border_count", ParamValue::Int(145)),
            ]),
        )
        .unwrap();
        let ModelSpec::Boost(c) = spec else { panic!() };
        assert_eq!(
            (c.n_rounds, c.max_depth, c.max_bins, c.growth),
            (1415, 6, 145, Growth::Oblivious)
        );
        assert_eq!(c.learning_rate, 0.1342);
    }

    #[test]
    fn rejects_unknown_and_mistyped() {
        let err = ModelSpec::from_params(ModelKind::Knn, &params(&[("neighbours", ParamValue::Int(3))])).unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "neighbours"));
        let err =
            ModelSpec::from_params(ModelKind::Knn, &params(&[("n_neighbors", ParamValue::Real(2.5))])).unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "n_neighbors"));
        let tuned = params(&[
            ("c", ParamValue::Real(0.104)),
            ("kernel", ParamValue::Text("linear".into())),
            ("gamma", ParamValue::Text("scale".into())),
            ("degree", ParamValue::Int(3)),
        ]);
        assert!(ModelSpec::from_params(ModelKind::Svm, &tuned).is_ok());
        let err =
            ModelSpec::from_params(ModelKind::Svm, &params(&[("kernel", ParamValue::Text("rbf".into()))])).unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "kernel"));
    }
}
