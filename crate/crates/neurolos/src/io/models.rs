//! Saved models: one pretty-printed JSON document per model.
//!
//! ```text
//! {
//!   "format": "neurolos-model",
//!   "version": 1,
//!   "family": "classic" | "sequence",
//!   ...family fields, then the fitted parameters under "model"
//! }
//! ```
//!
//! Classic documents carry the model kind, the hyperparameters used and the
//! feature columns in input order. Sequence documents carry the
//! architecture, training settings, window geometry, channel names and the
//! channel scaler; `model.params` is the flat parameter vector.

use std::path::Path;

use anyhow::{bail, Result};
use neurolos_core::classic::{Model, ModelKind, Params};
use neurolos_core::seq::{ChannelScaler, SeqArch, SeqModel, TrainConfig};
use serde::{Deserialize, Serialize};

use super::{read_json, write_json};

pub const MODEL_FORMAT: &str = "neurolos-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicArtifact {
    pub name: String,
    pub kind: ModelKind,
    pub params: Params,
    pub columns: Vec<String>,
    pub model: Model,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceArtifact {
    pub name: String,
    pub arch: SeqArch,
    pub train: TrainConfig,
    pub window: usize,
    pub step: usize,
    pub channels: Vec<String>,
    pub scaler: ChannelScaler,
    pub best_epoch: usize,
    /// Validation accuracy at `best_epoch`.
    pub val_accuracy: Option<f64>,
    pub model: SeqModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Artifact {
    Classic(ClassicArtifact),
    Sequence(SequenceArtifact),
}

#[derive(Serialize)]
struct Envelope<'a> {
    format: &'a str,
    version: u32,
    #[serde(flatten)]
    body: &'a Artifact,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Deserialize)]
struct Owned {
    #[serde(flatten)]
    body: Artifact,
}

pub fn save_model(artifact: &Artifact, path: &Path) -> Result<()> {
    write_json(
        path,
        &Envelope {
            format: MODEL_FORMAT,
            version: MODEL_VERSION,
            body: artifact,
        },
    )
}

pub fn load_model(path: &Path) -> Result<Artifact> {
    let header: Header = read_json(path)?;
    if header.format != MODEL_FORMAT {
        bail!("{} is not a saved model (format `{}`)", path.display(), header.format);
    }
    if header.version != MODEL_VERSION {
        bail!(
            "{} uses model format version {}, this build reads version {MODEL_VERSION}",
            path.display(),
            header.version
        );
    }
    Ok(read_json::<Owned>(path)?.body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use neurolos_core::classic::{Classifier, Learner, ModelSpec};
    use neurolos_core::seq::{LstmConfig, SequenceNet};
    use neurolos_core::synthgen::{planted_tabular, planted_windows};

    #[test]
    fn classic_round_trip_keeps_scores() {
        let ds = planted_tabular(120, 5, 2, 0.5, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        for kind in ModelKind::ALL {
            let spec = ModelSpec::from_params(kind, &Params::new()).unwrap();
            let model = spec.fit(&ds.x, &ds.y, 3, 5).unwrap();
            let art = Artifact::Classic(ClassicArtifact {
                name: kind.name().into(),
                kind,
                params: Params::new(),
                columns: ds.columns.clone(),
                model,
            });
            let path = dir.path().join(format!("{}.json", kind.name()));
            save_model(&art, &path).unwrap();
            let back = load_model(&path).unwrap();
            assert_eq!(back, art);
            let (Artifact::Classic(a), Artifact::Classic(b)) = (&art, &back) else {
                panic!()
            };
            for row in ds.x.iter_rows() {
                assert_eq!(a.model.scores(row), b.model.scores(row));
            }
        }
    }

    #[test]
    fn sequence_round_trip_and_version_check() {
        let samples = planted_windows(8, 6, 3, 1.0, 2).unwrap();
        let arch = SeqArch::Lstm(LstmConfig {
            hidden: 5,
            ..LstmConfig::default()
        });
        let model = arch.build(3, 3, 9).unwrap();
        let art = Artifact::Sequence(SequenceArtifact {
            name: "lstm".into(),
            arch,
            train: TrainConfig::default(),
            window: 6,
            step: 3,
            channels: vec!["a".into(), "b".into(), "c".into()],
            scaler: ChannelScaler::fit(&samples).unwrap(),
            best_epoch: 0,
            val_accuracy: None,
            model,
        });
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_model(&art, &path).unwrap();
        let Artifact::Sequence(back) = load_model(&path).unwrap() else {
            panic!()
        };
        let Artifact::Sequence(orig) = &art else { panic!() };
        for s in &samples {
            assert_eq!(back.model.logits(&s.x).unwrap(), orig.model.logits(&s.x).unwrap());
        }

        let text = std::fs::read_to_string(&path)
            .unwrap()
            .replacen("\"version\": 1", "\"version\": 7", 1);
        std::fs::write(&path, text).unwrap();
        let err = load_model(&path).unwrap_err();
        assert!(err.to_string().contains("version 7"), "{err}");
    }
}
