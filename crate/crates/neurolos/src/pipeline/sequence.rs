//! Window datasets shared by training, evaluation and importance.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use neurolos_core::features::group_split;
use neurolos_core::marts::{SeriesKind, SeriesMart};
use neurolos_core::seq::{build_windows, channel_medians, channel_names, SeqArch, WindowReport, WindowSample};
use neurolos_core::Executor;

use super::data::{Side, StaySplit};
use super::Stage;
use crate::config::ExperimentConfig;
use crate::io::marts::load_series_mart;

pub(crate) struct SequenceData {
    pub mart: SeriesMart,
    pub medians: Vec<f64>,
    pub channels: Vec<String>,
    pub train: BTreeSet<i64>,
    pub val: BTreeSet<i64>,
    pub test: BTreeSet<i64>,
}

pub(crate) struct Windows {
    pub train: Vec<WindowSample>,
    pub val: Vec<WindowSample>,
    pub test: Vec<WindowSample>,
    pub report: WindowReport,
}

impl SequenceData {
    /// Event mart plus the stay partition: validation stays come out of the
    /// training side, test stays are the static split's test side.
    pub fn load(root: &Path, cfg: &ExperimentConfig) -> Result<SequenceData> {
        let mart = load_series_mart(&root.join(Stage::Marts.dir()), SeriesKind::Events)?;
        let split = StaySplit::load(root)?;
        let train_side: Vec<i64> = split.stays(Side::Train).into_iter().collect();
        let (tr, va) = group_split(&train_side, cfg.sequence.val_fraction, cfg.seed)?;
        let train: BTreeSet<i64> = tr.iter().map(|&i| train_side[i]).collect();
        let val: BTreeSet<i64> = va.iter().map(|&i| train_side[i]).collect();
        let medians = channel_medians(&mart, Some(&train));
        Ok(SequenceData {
            channels: channel_names(mart.tests()),
            medians,
            train,
            val,
            test: split.stays(Side::Test),
            mart,
        })
    }

    pub fn windows<E: Executor>(&self, window: usize, step: usize, exec: &E) -> Result<Windows> {
        let (all, report) = build_windows(&self.mart, &self.medians, window, step, exec)?;
        let mut w = Windows {
            train: Vec::new(),
            val: Vec::new(),
            test: Vec::new(),
            report,
        };
        for s in all {
            if self.train.contains(&s.stay_id) {
                w.train.push(s);
            } else if self.val.contains(&s.stay_id) {
                w.val.push(s);
            } else if self.test.contains(&s.stay_id) {
                w.test.push(s);
            } else {
                bail!("stay {} of the event mart is missing from the split", s.stay_id);
            }
        }
        Ok(w)
    }
}

/// Every trained configuration of the grid, in config order.
#[derive(Debug, Clone)]
pub(crate) struct GridEntry {
    pub name: String,
    pub arch_name: String,
    pub arch: SeqArch,
    pub window: usize,
    pub step: usize,
}

pub(crate) fn arch_names(archs: &[SeqArch]) -> Vec<String> {
    archs
        .iter()
        .enumerate()
        .map(|(i, a)| {
            if archs.iter().filter(|b| b.name() == a.name()).count() > 1 {
                format!("{}{}", a.name(), i + 1)
            } else {
                a.name().to_string()
            }
        })
        .collect()
}

pub(crate) fn grid(cfg: &ExperimentConfig) -> Vec<GridEntry> {
    let names = arch_names(&cfg.sequence.archs);
    let mut out = Vec::new();
    for (arch, name) in cfg.sequence.archs.iter().zip(&names) {
        for &window in &cfg.sequence.windows {
            for &step in &cfg.sequence.steps {
                out.push(GridEntry {
                    name: format!("{name}_w{window}_s{step}"),
                    arch_name: name.clone(),
                    arch: *arch,
                    window,
                    step,
                });
            }
        }
    }
    out
}

pub(crate) fn sequence_dir(root: &Path) -> PathBuf {
    root.join(Stage::Train.dir()).join("sequence")
}
