//! generate, ingest and marts.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use anyhow::{Context, Result};
use neurolos_core::features::{split_indices, SplitSpec};
use neurolos_core::marts::{
    build_admissions_mart_with, build_series_mart, filter_neuro_admissions, resolve_tests, MartMeta, SeriesKind,
    SeriesReport, StaticMartOptions, StaticReport,
};
use neurolos_core::synthgen::generate_cohort_with;
use neurolos_core::tables::RawTables;
use neurolos_core::{Executor, LosClass};
use serde::{Deserialize, Serialize};

use super::{Run, Stage};
use crate::config::DataSource;
use crate::io::marts::{save_series_mart, save_static_mart, STATIC_MART};
use crate::io::tables::{emit_tables, read_tables, write_ground_truth};
use crate::io::{csv_reader, csv_writer, ddl, read_json, write_json};

pub(crate) const SELECTED: &str = "selected_admissions.csv";
pub(crate) const SPLIT: &str = "split.csv";

pub(super) fn generate<E: Executor>(run: &Run<'_, E>) -> Result<()> {
    let DataSource::Synthetic(spec) = &run.cfg.data else {
        log::info!(
            "generate: reading tables from {}, nothing to generate",
            run.raw_dir().display()
        );
        return Ok(());
    };
    let (raw, truth) = generate_cohort_with(spec, run.exec)?;
    let dir = run.dir(Stage::Generate);
    emit_tables(&raw, &dir)?;
    write_ground_truth(&truth, &dir)?;
    log::info!(
        "generate: {} patients, {} chart events",
        raw.patients.len(),
        raw.chartevents.len()
    );
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct IngestSummary {
    admissions: usize,
    icustays: usize,
    chartevents: usize,
    selected_admissions: usize,
    selected_stays: usize,
}

fn load_raw<E: Executor>(run: &Run<'_, E>) -> Result<RawTables> {
    let raw = read_tables(&run.raw_dir())?;
    raw.validate()?;
    Ok(raw)
}

pub(super) fn ingest<E: Executor>(run: &Run<'_, E>) -> Result<()> {
    let raw = load_raw(run)?;
    resolve_tests(&raw, &run.cfg.marts.tests())?;
    let selected = filter_neuro_admissions(&raw.diagnoses_icd);
    let dir = run.dir(Stage::Ingest);
    let mut w = csv_writer(&dir.join(SELECTED))?;
    w.write_record(["hadm_id"])?;
    for h in &selected {
        w.write_record([h.to_string()])?;
    }
    w.flush()?;
    let summary = IngestSummary {
        admissions: raw.admissions.len(),
        icustays: raw.icustays.len(),
        chartevents: raw.chartevents.len(),
        selected_admissions: selected.len(),
        selected_stays: raw.icustays.iter().filter(|s| selected.contains(&s.hadm_id)).count(),
    };
    log::info!(
        "ingest: {} of {} admissions carry a neurological diagnosis",
        summary.selected_admissions,
        summary.admissions
    );
    write_json(&dir.join("summary.json"), &summary)
}

pub(crate) fn read_selected(dir: &Path) -> Result<BTreeSet<i64>> {
    let path = dir.join(SELECTED);
    let mut r = csv_reader(&path)?;
    r.records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec?;
            rec[0]
                .parse()
                .with_context(|| format!("{} line {}", path.display(), i + 2))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub(crate) enum Side {
    Train,
    Test,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct SplitRow {
    pub stay_id: i64,
    pub hadm_id: i64,
    pub label: String,
    pub split: Side,
}

/// Stay-level train/test assignment shared by every model family.
pub(crate) struct StaySplit {
    pub rows: Vec<SplitRow>,
}

impl StaySplit {
    pub fn load(root: &Path) -> Result<StaySplit> {
        let path = root.join(Stage::Marts.dir()).join(SPLIT);
        let mut r = csv_reader(&path)?;
        let rows = r
            .deserialize()
            .enumerate()
            .map(|(i, row)| row.with_context(|| format!("{} line {}", path.display(), i + 2)))
            .collect::<Result<_>>()?;
        Ok(StaySplit { rows })
    }

    pub fn stays(&self, side: Side) -> BTreeSet<i64> {
        self.rows
            .iter()
            .filter(|r| r.split == side)
            .map(|r| r.stay_id)
            .collect()
    }

    pub fn side_of(&self) -> BTreeMap<i64, Side> {
        self.rows.iter().map(|r| (r.stay_id, r.split)).collect()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct MartsReport {
    train_stays: usize,
    test_stays: usize,
    admissions_mart: StaticReport,
    chartevents_original: SeriesReport,
    chartevents_by_minute: Option<SeriesReport>,
}

pub(super) fn marts<E: Executor>(run: &Run<'_, E>) -> Result<()> {
    let cfg = run.cfg;
    let raw = load_raw(run)?;
    let selected = read_selected(&run.dir(Stage::Ingest))?;
    let tests = cfg.marts.tests();
    let edges = cfg.marts.bin_edges;

    let mut stays: Vec<_> = raw.icustays.iter().filter(|s| selected.contains(&s.hadm_id)).collect();
    stays.sort_by_key(|s| s.stay_id);
    let labels: Vec<LosClass> = stays
        .iter()
        .map(|s| edges.bin(s.los).with_context(|| format!("stay {}", s.stay_id)))
        .collect::<Result<_>>()?;
    let codes: Vec<usize> = labels.iter().map(|c| c.code()).collect();
    let spec = SplitSpec {
        test_fraction: cfg.features.test_fraction,
        seed: cfg.seed,
        stratify: true,
    };
    let (train, _) = split_indices(&codes, LosClass::COUNT, &vec![true; codes.len()], &spec)?;
    let train: BTreeSet<usize> = train.into_iter().collect();

    let dir = run.dir(Stage::Marts);
    let mut w = csv_writer(&dir.join(SPLIT))?;
    for (i, s) in stays.iter().enumerate() {
        w.serialize(SplitRow {
            stay_id: s.stay_id,
            hadm_id: s.hadm_id,
            label: labels[i].name().to_string(),
            split: if train.contains(&i) { Side::Train } else { Side::Test },
        })?;
    }
    w.flush()?;

    let fit_stays: BTreeSet<i64> = train.iter().map(|&i| stays[i].stay_id).collect();
    let opts = StaticMartOptions {
        bin_edges: edges,
        window_hours: cfg.marts.window_hours,
        medians: None,
        fit_stays: Some(fit_stays),
    };
    let (mart, static_report) = build_admissions_mart_with(&raw, &selected, &tests, &opts)?;
    save_static_mart(&mart, &dir)?;
    let (events, event_report) = build_series_mart(&raw, &selected, &tests, SeriesKind::Events, edges)?;
    save_series_mart(&events, &dir)?;
    let minute_report = if cfg.marts.minute_mart {
        let (minutes, report) = build_series_mart(&raw, &selected, &tests, SeriesKind::Minutes, edges)?;
        save_series_mart(&minutes, &dir)?;
        Some(report)
    } else {
        None
    };
    log::info!(
        "marts: {} stays, {} mart columns, {} event rows",
        mart.rows.len(),
        mart.columns().len(),
        events.total_rows()
    );
    write_json(
        &dir.join("report.json"),
        &MartsReport {
            train_stays: train.len(),
            test_stays: stays.len() - train.len(),
            admissions_mart: static_report,
            chartevents_original: event_report,
            chartevents_by_minute: minute_report,
        },
    )?;
    write_ddl(run)
}

/// Writes the DDL requested with `--emit-ddl`, if any.
pub(super) fn write_ddl<E: Executor>(run: &Run<'_, E>) -> Result<()> {
    let Some(path) = &run.emit_ddl else { return Ok(()) };
    let dir = run.dir(Stage::Marts);
    let meta: MartMeta = read_json(&dir.join(STATIC_MART).join("meta.json"))?;
    let mut series = vec![SeriesKind::Events];
    if dir.join(SeriesKind::Minutes.mart_name()).is_dir() {
        series.push(SeriesKind::Minutes);
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, ddl::ddl(&meta, &series)).with_context(|| format!("writing {}", path.display()))
}
