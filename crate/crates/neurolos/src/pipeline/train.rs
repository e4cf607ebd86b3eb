//! tune and train.

use std::path::Path;

use anyhow::{Context, Result};
use neurolos_core::classic::{Learner, ModelSpec, Params};
use neurolos_core::eval::{cross_validate, random_search, SearchResult};
use neurolos_core::features::{Dataset, Provenance};
use neurolos_core::rng::{self, domain};
use neurolos_core::seq::{train_sequence_model, ChannelScaler, EpochRecord};
use neurolos_core::{Executor, LosClass};
use serde::{Deserialize, Serialize};

use super::features::{block_columns, load_split, smote_k};
use super::sequence::{grid, sequence_dir, SequenceData};
use super::{model_file, Run, Stage};
use crate::config::ModelBlock;
use crate::io::models::{save_model, Artifact, ClassicArtifact, SequenceArtifact};
use crate::io::{csv_writer, read_json, write_json};

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct TuneOutcome {
    /// Block parameters overlaid with the best trial's.
    pub params: Params,
    pub result: SearchResult,
}

fn tune_path(root: &Path, name: &str) -> std::path::PathBuf {
    model_file(&root.join(Stage::Tune.dir()), name)
}

fn real_rows(ds: &Dataset) -> Dataset {
    let idx: Vec<usize> = (0..ds.len())
        .filter(|&i| ds.provenance[i] == Provenance::Real)
        .collect();
    ds.select_rows(&idx)
}

pub(super) fn tune<E: Executor>(run: &Run<'_, E>) -> Result<()> {
    let cfg = run.cfg;
    let (train, _) = load_split(&run.root)?;
    for block in &cfg.models {
        let Some(search) = &block.search else { continue };
        let cols = block_columns(&run.root, block, &train)?;
        let ds = real_rows(&train.select_columns(&cols));
        // Nested subsamples: every rung trains on a prefix of one fixed order.
        let order = rng::permutation(&mut rng::stream(cfg.seed, domain::SEARCH, u64::MAX), ds.len());
        let space = search.space(block.kind);
        let objective = |trial: &Params, fraction: f64| -> neurolos_core::Result<f64> {
            let mut params = block.params.clone();
            params.extend(trial.iter().map(|(k, v)| (k.clone(), v.clone())));
            let spec = ModelSpec::from_params(block.kind, &params)?;
            let n = ((ds.len() as f64 * fraction).ceil() as usize).clamp(1, ds.len());
            let mut rows = order[..n].to_vec();
            rows.sort_unstable();
            let cv = cross_validate(
                &ds.select_rows(&rows),
                &spec,
                search.folds,
                cfg.seed,
                smote_k(cfg),
                run.exec,
            )?;
            Ok(cv.folds.iter().map(|f| search.metric.of(f)).sum::<f64>() / cv.folds.len() as f64)
        };
        let result = random_search(&space, objective, search.budget, cfg.seed, search.halving, run.exec)
            .with_context(|| format!("searching `{}`", block.name()))?;
        let mut params = block.params.clone();
        params.extend(result.best.params.iter().map(|(k, v)| (k.clone(), v.clone())));
        log::info!(
            "tune: `{}` best {} = {:.4} after {} trials",
            block.name(),
            search.metric.name(),
            result.best.value.unwrap_or(f64::NAN),
            result.trials.len()
        );
        write_json(&tune_path(&run.root, &block.name()), &TuneOutcome { params, result })?;
    }
    Ok(())
}

/// Parameters a block trains with: tuned ones when it was searched.
pub(crate) fn final_params(root: &Path, block: &ModelBlock) -> Result<Params> {
    if block.search.is_none() {
        return Ok(block.params.clone());
    }
    let tuned: TuneOutcome = read_json(&tune_path(root, &block.name()))?;
    Ok(tuned.params)
}

pub(super) fn train<E: Executor>(run: &Run<'_, E>) -> Result<()> {
    let cfg = run.cfg;
    let dir = run.dir(Stage::Train);
    if !cfg.models.is_empty() {
        let (train, _) = load_split(&run.root)?;
        for block in &cfg.models {
            let params = final_params(&run.root, block)?;
            let spec = ModelSpec::from_params(block.kind, &params)?;
            let cols = block_columns(&run.root, block, &train)?;
            let ds = train.select_columns(&cols);
            let model = spec
                .fit_with(&ds.x, &ds.y, LosClass::COUNT, cfg.seed, run.exec)
                .with_context(|| format!("fitting `{}`", block.name()))?;
            log::info!("train: fitted `{}` on {} rows", block.name(), ds.len());
            save_model(
                &Artifact::Classic(ClassicArtifact {
                    name: block.name(),
                    kind: block.kind,
                    params,
                    columns: ds.columns.clone(),
                    model,
                }),
                &model_file(&dir, &block.name()),
            )?;
        }
    }
    if !cfg.sequence.archs.is_empty() {
        train_sequences(run)?;
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct GridRecord {
    window: usize,
    step: usize,
    stays: usize,
    short_stays: usize,
    train_windows: usize,
    val_windows: usize,
    test_windows: usize,
}

fn train_sequences<E: Executor>(run: &Run<'_, E>) -> Result<()> {
    let cfg = run.cfg;
    let data = SequenceData::load(&run.root, cfg)?;
    let dir = sequence_dir(&run.root);
    let entries = grid(cfg);
    let mut records = Vec::new();
    let mut geometry: Vec<(usize, usize)> = entries.iter().map(|e| (e.window, e.step)).collect();
    geometry.sort_unstable();
    geometry.dedup();
    for (window, step) in geometry {
        let mut w = data.windows(window, step, run.exec)?;
        records.push(GridRecord {
            window,
            step,
            stays: w.report.stays,
            short_stays: w.report.short_stays,
            train_windows: w.train.len(),
            val_windows: w.val.len(),
            test_windows: w.test.len(),
        });
        if w.train.is_empty() {
            log::warn!("train: no stay is long enough for window {window}; skipping");
            continue;
        }
        let scaler = ChannelScaler::fit(&w.train)?;
        scaler.transform(&mut w.train);
        scaler.transform(&mut w.val);
        for e in entries.iter().filter(|e| (e.window, e.step) == (window, step)) {
            let outcome = train_sequence_model(
                &e.arch,
                &w.train,
                &w.val,
                LosClass::COUNT,
                &cfg.sequence.train,
                run.exec,
            )
            .with_context(|| format!("training `{}`", e.name))?;
            let val_accuracy = outcome
                .history
                .iter()
                .find(|r| r.epoch == outcome.best_epoch)
                .and_then(|r| r.val_accuracy);
            log::info!(
                "train: `{}` on {} windows, best epoch {} (val accuracy {})",
                e.name,
                w.train
                    .len()
                    .min(cfg.sequence.train.max_train_windows.unwrap_or(usize::MAX)),
                outcome.best_epoch,
                val_accuracy.map_or("n/a".to_string(), |a| format!("{a:.4}"))
            );
            write_history(&outcome.history, &dir.join(format!("{}_history.csv", e.name)))?;
            save_model(
                &Artifact::Sequence(SequenceArtifact {
                    name: e.name.clone(),
                    arch: e.arch,
                    train: cfg.sequence.train.clone(),
                    window,
                    step,
                    channels: data.channels.clone(),
                    scaler: scaler.clone(),
                    best_epoch: outcome.best_epoch,
                    val_accuracy,
                    model: outcome.model,
                }),
                &model_file(&dir, &e.name),
            )?;
        }
    }
    write_json(&dir.join("windows.json"), &records)
}

fn write_history(history: &[EpochRecord], path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["epoch", "train_loss", "val_loss", "val_accuracy"])?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
    for r in history {
        w.write_record([
            r.epoch.to_string(),
            r.train_loss.to_string(),
            opt(r.val_loss),
            opt(r.val_accuracy),
        ])?;
    }
    w.flush()?;
    Ok(())
}
