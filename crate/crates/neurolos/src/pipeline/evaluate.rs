//! evaluate and importance.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use neurolos_core::classic::{argmax, Classifier};
use neurolos_core::eval::{
    compute_metrics, permutation_importance, sequence_permutation_importance, Importance, MetricsReport,
};
use neurolos_core::features::{Dataset, Provenance};
use neurolos_core::seq::{SequenceNet, WindowSample};
use neurolos_core::{Executor, LosClass, Matrix};
use serde::{Deserialize, Serialize};

use super::data::StaySplit;
use super::features::load_split;
use super::sequence::{grid, sequence_dir, SequenceData};
use super::{model_file, Run, Stage};
use crate::io::models::{load_model, Artifact, ClassicArtifact, SequenceArtifact};
use crate::io::tables::{read_ground_truth, table_path, GROUND_TRUTH};
use crate::io::{csv_writer, read_json, write_json};

pub const METRICS_FILE: &str = "metrics.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Classic,
    Sequence,
    /// Majority class of the training stays.
    Baseline,
    /// Bayes class from the generator's ground truth.
    Reference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResult {
    pub name: String,
    pub family: Family,
    #[serde(default)]
    pub arch: Option<String>,
    #[serde(default)]
    pub window: Option<usize>,
    #[serde(default)]
    pub step: Option<usize>,
    pub metrics: MetricsReport,
}

fn columns_of(ds: &Dataset, names: &[String]) -> Result<Matrix> {
    let idx = names
        .iter()
        .map(|n| {
            ds.columns
                .iter()
                .position(|c| c == n)
                .with_context(|| format!("feature `{n}` not in the test table"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ds.x.select_columns(&idx))
}

fn load_classic(root: &Path, name: &str) -> Result<ClassicArtifact> {
    match load_model(&model_file(&root.join(Stage::Train.dir()), name))? {
        Artifact::Classic(a) => Ok(a),
        Artifact::Sequence(_) => bail!("`{name}` is a sequence model"),
    }
}

fn load_sequence(root: &Path, name: &str) -> Result<Option<SequenceArtifact>> {
    let path = model_file(&sequence_dir(root), name);
    if !path.is_file() {
        return Ok(None);
    }
    match load_model(&path)? {
        Artifact::Sequence(a) => Ok(Some(a)),
        Artifact::Classic(_) => bail!("`{name}` is a classic model"),
    }
}

fn predict_windows<N: SequenceNet + ?Sized, E: Executor>(net: &N, xs: &[Matrix], exec: &E) -> Result<Vec<usize>> {
    exec.map(xs.len(), |i| net.logits(&xs[i]).map(|l| argmax(&l)))
        .into_iter()
        .map(|r| r.map_err(anyhow::Error::from))
        .collect()
}

/// Test windows of a trained configuration, scaled like its training windows.
fn test_windows<E: Executor>(data: &SequenceData, art: &SequenceArtifact, exec: &E) -> Result<Vec<WindowSample>> {
    if data.channels != art.channels {
        bail!("`{}` was trained on different channels", art.name);
    }
    let mut test = data.windows(art.window, art.step, exec)?.test;
    art.scaler.transform(&mut test);
    Ok(test)
}

fn real_test(test: &Dataset) -> Dataset {
    let idx: Vec<usize> = (0..test.len())
        .filter(|&i| test.provenance[i] == Provenance::Real)
        .collect();
    test.select_rows(&idx)
}

pub(super) fn evaluate<E: Executor>(run: &Run<'_, E>) -> Result<()> {
    let cfg = run.cfg;
    let dir = run.dir(Stage::Evaluate);
    let (train, test) = load_split(&run.root)?;
    let test = real_test(&test);
    let stays = test.groups.clone().unwrap_or_default();
    let mut results = Vec::new();

    let mut counts = [0usize; LosClass::COUNT];
    for i in (0..train.len()).filter(|&i| train.provenance[i] == Provenance::Real) {
        counts[train.y[i]] += 1;
    }
    let majority = argmax(&counts.map(|c| c as f64));
    results.push(ModelResult {
        name: "majority".into(),
        family: Family::Baseline,
        arch: None,
        window: None,
        step: None,
        metrics: compute_metrics(&test.y, &vec![majority; test.len()], LosClass::COUNT)?,
    });

    let truth_path = table_path(&run.dir(Stage::Generate), GROUND_TRUTH);
    if truth_path.is_file() {
        let truth = read_ground_truth(&run.dir(Stage::Generate))?;
        let bayes: BTreeMap<i64, usize> = truth.admissions.iter().map(|a| (a.hadm_id, a.bayes_class())).collect();
        let split = StaySplit::load(&run.root)?;
        let hadm: BTreeMap<i64, i64> = split.rows.iter().map(|r| (r.stay_id, r.hadm_id)).collect();
        let pred = stays
            .iter()
            .map(|s| {
                hadm.get(s)
                    .and_then(|h| bayes.get(h))
                    .copied()
                    .with_context(|| format!("no ground truth for stay {s}"))
            })
            .collect::<Result<Vec<_>>>()?;
        results.push(ModelResult {
            name: "bayes".into(),
            family: Family::Reference,
            arch: None,
            window: None,
            step: None,
            metrics: compute_metrics(&test.y, &pred, LosClass::COUNT)?,
        });
    }

    for block in &cfg.models {
        let art = load_classic(&run.root, &block.name())?;
        let x = columns_of(&test, &art.columns)?;
        let pred = art.model.predict(&x);
        let mut w = csv_writer(&dir.join("predictions").join(format!("{}.csv", art.name)))?;
        w.write_record(["stay_id", "label", "predicted"])?;
        for i in 0..test.len() {
            w.write_record([stays[i].to_string(), test.y[i].to_string(), pred[i].to_string()])?;
        }
        w.flush()?;
        results.push(ModelResult {
            name: art.name,
            family: Family::Classic,
            arch: None,
            window: None,
            step: None,
            metrics: compute_metrics(&test.y, &pred, LosClass::COUNT)?,
        });
    }

    if !cfg.sequence.archs.is_empty() {
        let data = SequenceData::load(&run.root, cfg)?;
        for entry in grid(cfg) {
            let Some(art) = load_sequence(&run.root, &entry.name)? else {
                continue;
            };
            let test = test_windows(&data, &art, run.exec)?;
            if test.is_empty() {
                log::warn!("evaluate: no test windows for `{}`", art.name);
                continue;
            }
            let xs: Vec<Matrix> = test.iter().map(|s| s.x.clone()).collect();
            let y: Vec<usize> = test.iter().map(|s| s.label).collect();
            let pred = predict_windows(&art.model, &xs, run.exec)?;
            let mut w = csv_writer(&dir.join("predictions").join(format!("{}.csv", art.name)))?;
            w.write_record(["stay_id", "start", "label", "predicted"])?;
            for (s, p) in test.iter().zip(&pred) {
                w.write_record([
                    s.stay_id.to_string(),
                    s.start.to_string(),
                    s.label.to_string(),
                    p.to_string(),
                ])?;
            }
            w.flush()?;
            results.push(ModelResult {
                name: art.name.clone(),
                family: Family::Sequence,
                arch: Some(entry.arch_name.clone()),
                window: Some(art.window),
                step: Some(art.step),
                metrics: compute_metrics(&y, &pred, LosClass::COUNT)?,
            });
        }
    }
    for r in &results {
        log::info!(
            "evaluate: {:<24} accuracy {:.4}  macro F1 {:.4}",
            r.name,
            r.metrics.accuracy,
            r.metrics.macro_avg.f1
        );
    }
    write_json(&dir.join(METRICS_FILE), &results)
}

pub(crate) fn load_results(root: &Path) -> Result<Vec<ModelResult>> {
    read_json(&root.join(Stage::Evaluate.dir()).join(METRICS_FILE))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct ImportanceRow {
    pub feature: String,
    pub mean: f64,
    pub std: f64,
}

fn write_importance(path: &Path, names: &[String], imp: &[Importance]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for (n, i) in names.iter().zip(imp) {
        w.serialize(ImportanceRow {
            feature: n.clone(),
            mean: i.mean,
            std: i.std,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Evenly spaced subset of at most `cap` indices.
fn spread(n: usize, cap: usize) -> Vec<usize> {
    if n <= cap {
        return (0..n).collect();
    }
    (0..cap).map(|i| i * n / cap).collect()
}

pub(super) fn importance<E: Executor>(run: &Run<'_, E>) -> Result<()> {
    let cfg = run.cfg;
    let ev = &cfg.eval;
    let dir = run.dir(Stage::Importance);
    let (_, test) = load_split(&run.root)?;
    let test = real_test(&test);
    for block in &cfg.models {
        let art = load_classic(&run.root, &block.name())?;
        let x = columns_of(&test, &art.columns)?;
        let imp = permutation_importance(
            &art.model,
            &x,
            &test.y,
            ev.importance_metric,
            ev.importance_repeats,
            cfg.seed,
            run.exec,
        )?;
        write_importance(&dir.join(format!("{}.csv", art.name)), &art.columns, &imp)?;
        log::info!("importance: `{}` done", art.name);
    }

    if cfg.sequence.archs.is_empty() {
        return Ok(());
    }
    // One model per architecture: the grid entry with the best validation accuracy.
    let data = SequenceData::load(&run.root, cfg)?;
    let mut best: BTreeMap<String, (f64, SequenceArtifact)> = BTreeMap::new();
    let mut order = Vec::new();
    for entry in grid(cfg) {
        let Some(art) = load_sequence(&run.root, &entry.name)? else {
            continue;
        };
        let key = entry.arch_name.clone();
        let score = art.val_accuracy.unwrap_or(f64::NEG_INFINITY);
        if !order.contains(&key) {
            order.push(key.clone());
        }
        if best.get(&key).is_none_or(|(s, _)| score > *s) {
            best.insert(key, (score, art));
        }
    }
    for key in order {
        let (_, art) = &best[&key];
        let test = test_windows(&data, art, run.exec)?;
        if test.is_empty() {
            continue;
        }
        let keep = spread(test.len(), ev.importance_max_windows);
        let xs: Vec<Matrix> = keep.iter().map(|&i| test[i].x.clone()).collect();
        let y: Vec<usize> = keep.iter().map(|&i| test[i].label).collect();
        let predict = |samples: &[Matrix]| -> neurolos_core::Result<Vec<usize>> {
            samples.iter().map(|x| art.model.predict(x)).collect()
        };
        let imp = sequence_permutation_importance(
            predict,
            &xs,
            &y,
            LosClass::COUNT,
            ev.importance_metric,
            ev.importance_repeats,
            cfg.seed,
            run.exec,
        )?;
        write_importance(&dir.join(format!("{}.csv", art.name)), &art.channels, &imp)?;
        log::info!("importance: `{}` done", art.name);
    }
    Ok(())
}

pub(crate) fn read_importance(path: &Path) -> Result<Vec<ImportanceRow>> {
    let mut r = crate::io::csv_reader(path)?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("reading {}", path.display()))
}
