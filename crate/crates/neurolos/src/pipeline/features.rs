//! features: encoding fitted on training stays, SMOTE, RFE.

use std::path::Path;

use anyhow::{bail, Context, Result};
use neurolos_core::classic::ModelSpec;
use neurolos_core::features::{rfe_select, smote_oversample, Dataset, Encoder, RfeConfig, RfeResult};
use neurolos_core::Executor;
use serde::{Deserialize, Serialize};

use super::data::{Side, StaySplit};
use super::{Run, Stage};
use crate::config::{ExperimentConfig, ModelBlock};
use crate::io::datasets::{read_dataset, write_dataset};
use crate::io::marts::load_static_mart;
use crate::io::{read_json, write_json};

pub(crate) const TRAIN: &str = "train.csv";
pub(crate) const TEST: &str = "test.csv";

#[derive(Debug, Serialize, Deserialize)]
struct FeatureSummary {
    columns: usize,
    dropped_constant: Vec<String>,
    train_rows: usize,
    synthetic_rows: usize,
    test_rows: usize,
    train_class_counts: Vec<usize>,
    test_class_counts: Vec<usize>,
}

pub(crate) fn rfe_path(root: &Path, name: &str) -> std::path::PathBuf {
    root.join(Stage::Features.dir())
        .join("rfe")
        .join(format!("{name}.json"))
}

pub(crate) fn smote_k(cfg: &ExperimentConfig) -> Option<usize> {
    cfg.features.smote.then_some(cfg.features.k_neighbors)
}

pub(super) fn features<E: Executor>(run: &Run<'_, E>) -> Result<()> {
    let cfg = run.cfg;
    let marts = run.dir(Stage::Marts);
    let mart = load_static_mart(&marts)?;
    let side = StaySplit::load(&run.root)?.side_of();
    let (mut train_rows, mut test_rows) = (Vec::new(), Vec::new());
    for (i, r) in mart.rows.iter().enumerate() {
        match side.get(&r.stay_id) {
            Some(Side::Train) => train_rows.push(i),
            Some(Side::Test) => test_rows.push(i),
            None => bail!("stay {} of the static mart is missing from the split", r.stay_id),
        }
    }
    let encoder = Encoder::fit(&mart, &train_rows)?;
    let mut train = encoder.transform(&mart, &train_rows)?;
    let test = encoder.transform(&mart, &test_rows)?;
    if let Some(k) = smote_k(cfg) {
        train = smote_oversample(&train, k, cfg.seed)?.dataset;
    }

    let dir = run.dir(Stage::Features);
    write_json(&dir.join("encoder.json"), &encoder)?;
    write_dataset(&train, &dir.join(TRAIN))?;
    write_dataset(&test, &dir.join(TEST))?;
    write_json(
        &dir.join("summary.json"),
        &FeatureSummary {
            columns: train.columns.len(),
            dropped_constant: encoder.report.dropped_constant.clone(),
            train_rows: train.len(),
            synthetic_rows: train.synthetic_count(),
            test_rows: test.len(),
            train_class_counts: train.class_counts(),
            test_class_counts: test.class_counts(),
        },
    )?;
    log::info!(
        "features: {} columns, {} training rows ({} synthetic), {} test rows",
        train.columns.len(),
        train.len(),
        train.synthetic_count(),
        test.len()
    );

    for block in cfg.models.iter().filter(|b| b.rfe) {
        let spec = ModelSpec::from_params(block.kind, &block.params)?;
        let rfe = RfeConfig {
            step_k: cfg.features.rfe.step_k,
            min_features: cfg.features.rfe.min_features,
            max_features: cfg.features.rfe.max_features,
            cv_folds: cfg.features.rfe.cv_folds,
            seed: cfg.seed,
            smote: smote_k(cfg),
        };
        let result =
            rfe_select(&train, &spec, &rfe, run.exec).with_context(|| format!("RFE for `{}`", block.name()))?;
        log::info!(
            "features: RFE keeps {} columns for `{}`",
            result.selected.len(),
            block.name()
        );
        write_json(&rfe_path(&run.root, &block.name()), &result)?;
    }
    Ok(())
}

pub(crate) fn load_split(root: &Path) -> Result<(Dataset, Dataset)> {
    let dir = root.join(Stage::Features.dir());
    Ok((read_dataset(&dir.join(TRAIN))?, read_dataset(&dir.join(TEST))?))
}

/// Column indices a block trains on: its RFE selection or every column.
pub(crate) fn block_columns(root: &Path, block: &ModelBlock, ds: &Dataset) -> Result<Vec<usize>> {
    if !block.rfe {
        return Ok((0..ds.columns.len()).collect());
    }
    let rfe: RfeResult = read_json(&rfe_path(root, &block.name()))?;
    rfe.names
        .iter()
        .map(|n| {
            ds.columns
                .iter()
                .position(|c| c == n)
                .with_context(|| format!("RFE column `{n}` not in the feature table"))
        })
        .collect()
}
