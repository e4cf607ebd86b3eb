//! Experiment configuration: one JSON document per run.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use neurolos_core::classic::{ModelKind, ModelSpec, Params};
use neurolos_core::eval::{default_space, Halving, Metric, SearchSpace};
use neurolos_core::seq::{SeqArch, TrainConfig};
use neurolos_core::synthgen::{generated_tests, CohortSpec};
use neurolos_core::BinEdges;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Synthetic(CohortSpec),
    /// Directory of MIMIC-style CSV tables.
    RawDir(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MartOptions {
    /// Test abbreviations; the generator's catalogue when absent.
    pub tests: Option<Vec<String>>,
    pub bin_edges: BinEdges,
    pub window_hours: f64,
    pub minute_mart: bool,
}

impl Default for MartOptions {
    fn default() -> Self {
        MartOptions {
            tests: None,
            bin_edges: BinEdges::default(),
            window_hours: 24.0,
            minute_mart: false,
        }
    }
}

impl MartOptions {
    pub fn tests(&self) -> Vec<String> {
        self.tests.clone().unwrap_or_else(generated_tests)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfeOptions {
    pub step_k: usize,
    pub min_features: Option<usize>,
    pub max_features: Option<usize>,
    pub cv_folds: usize,
}

impl Default for RfeOptions {
    fn default() -> Self {
        RfeOptions {
            step_k: 10,
            min_features: None,
            max_features: None,
            cv_folds: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureOptions {
    pub test_fraction: f64,
    pub smote: bool,
    pub k_neighbors: usize,
    pub rfe: RfeOptions,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        FeatureOptions {
            test_fraction: 0.2,
            smote: true,
            k_neighbors: 5,
            rfe: RfeOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchOptions {
    pub budget: usize,
    /// Search space; the model's default space when absent.
    pub space: Option<SearchSpace>,
    pub halving: Option<Halving>,
    pub folds: usize,
    pub metric: Metric,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            budget: 20,
            space: None,
            halving: None,
            folds: 3,
            metric: Metric::MacroF1,
        }
    }
}

impl SearchOptions {
    pub fn space(&self, kind: ModelKind) -> SearchSpace {
        self.space.clone().unwrap_or_else(|| default_space(kind))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub kind: ModelKind,
    /// Output name; the kind's name when absent.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub params: Params,
    /// Random search over the block's space; searched values override `params`.
    #[serde(default)]
    pub search: Option<SearchOptions>,
    /// Recursive feature elimination before training.
    #[serde(default)]
    pub rfe: bool,
}

impl ModelBlock {
    pub fn name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.name().to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SequenceOptions {
    pub windows: Vec<usize>,
    pub steps: Vec<usize>,
    /// Share of training stays held out for validation and model selection.
    pub val_fraction: f64,
    pub train: TrainConfig,
    pub archs: Vec<SeqArch>,
}

impl Default for SequenceOptions {
    fn default() -> Self {
        SequenceOptions {
            windows: vec![16, 32, 64],
            steps: vec![8, 16],
            val_fraction: 0.2,
            train: TrainConfig::default(),
            archs: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalOptions {
    pub metrics: Vec<Metric>,
    pub importance_metric: Metric,
    pub importance_repeats: usize,
    /// Test windows scored for sequence channel importance.
    pub importance_max_windows: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            metrics: vec![Metric::Accuracy, Metric::MacroF1, Metric::WeightedF1],
            importance_metric: Metric::Accuracy,
            importance_repeats: 5,
            importance_max_windows: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub data: DataSource,
    #[serde(default)]
    pub marts: MartOptions,
    #[serde(default)]
    pub features: FeatureOptions,
    #[serde(default)]
    pub models: Vec<ModelBlock>,
    #[serde(default)]
    pub sequence: SequenceOptions,
    #[serde(default)]
    pub eval: EvalOptions,
    /// Output root; `NEUROLOS_OUT` and `--out` take precedence.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn field<T>(path: &str, r: neurolos_core::Result<T>) -> Result<T> {
    r.with_context(|| format!("at `{path}`"))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            anyhow::anyhow!("at `{path}`: {}", e.into_inner())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        ExperimentConfig::from_json(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        if let DataSource::Synthetic(spec) = &self.data {
            field("data.synthetic", spec.validate())?;
        }
        field("marts.bin_edges", self.marts.bin_edges.validate())?;
        if !(self.marts.window_hours > 0.0 && self.marts.window_hours.is_finite()) {
            bail!("at `marts.window_hours`: must be positive");
        }
        if self.marts.tests.as_ref().is_some_and(|t| t.is_empty()) {
            bail!("at `marts.tests`: list at least one test");
        }
        let f = &self.features;
        if !(f.test_fraction > 0.0 && f.test_fraction < 1.0) {
            bail!("at `features.test_fraction`: must lie strictly between 0 and 1");
        }
        if f.k_neighbors == 0 {
            bail!("at `features.k_neighbors`: must be at least 1");
        }
        if f.rfe.step_k == 0 || f.rfe.cv_folds < 2 {
            bail!("at `features.rfe`: step_k must be at least 1 and cv_folds at least 2");
        }

        let mut names = BTreeSet::new();
        for (i, m) in self.models.iter().enumerate() {
            let at = format!("models[{i}]");
            ModelSpec::from_params(m.kind, &m.params).with_context(|| format!("at `{at}.params`"))?;
            if !names.insert(m.name()) {
                bail!("at `{at}.name`: `{}` is used twice", m.name());
            }
            if let Some(s) = &m.search {
                if s.budget == 0 {
                    bail!("at `{at}.search.budget`: must be at least 1");
                }
                if s.folds < 2 {
                    bail!("at `{at}.search.folds`: must be at least 2");
                }
                field(&format!("{at}.search.space"), s.space(m.kind).validate())?;
                if let Some(h) = &s.halving {
                    if h.rungs == 0 || h.reduction < 2 {
                        bail!("at `{at}.search.halving`: needs at least 1 rung and a reduction of at least 2");
                    }
                }
            }
            if m.rfe && m.kind == ModelKind::Knn {
                bail!("at `{at}.rfe`: knn has no feature importance to eliminate by");
            }
        }

        let s = &self.sequence;
        if !s.archs.is_empty() {
            if s.windows.is_empty() || s.steps.is_empty() {
                bail!("at `sequence`: windows and steps must be non-empty");
            }
            if let Some((i, _)) = s.windows.iter().enumerate().find(|(_, &w)| w == 0) {
                bail!("at `sequence.windows[{i}]`: must be at least 1");
            }
            if let Some((i, _)) = s.steps.iter().enumerate().find(|(_, &w)| w == 0) {
                bail!("at `sequence.steps[{i}]`: must be at least 1");
            }
            if !(s.val_fraction > 0.0 && s.val_fraction < 1.0) {
                bail!("at `sequence.val_fraction`: must lie strictly between 0 and 1");
            }
            field("sequence.train", s.train.validate())?;
            for (i, a) in s.archs.iter().enumerate() {
                field(&format!("sequence.archs[{i}]"), a.validate())?;
            }
        }
        if self.eval.importance_repeats == 0 {
            bail!("at `eval.importance_repeats`: must be at least 1");
        }
        if self.eval.metrics.is_empty() {
            bail!("at `eval.metrics`: list at least one metric");
        }
        Ok(())
    }

    /// Canonical JSON of everything that affects results.
    pub fn canonical(&self) -> String {
        let mut c = self.clone();
        c.output = None;
        serde_json::to_string(&c).expect("config serializes")
    }
}
