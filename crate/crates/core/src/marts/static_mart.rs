use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use chrono::{Datelike, NaiveDateTime, TimeDelta, Timelike};
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{resolve_tests, ChannelKind, MartMeta, MART_SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::los::{BinEdges, LosClass};
use crate::tables::{ChartEvent, RawTables};

/// Level used for a categorical test never charted in the aggregation window.
pub const UNOBSERVED: &str = "unobserved";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Categorical,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MartColumn {
    pub name: String,
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Cat(String),
}

impl Cell {
    pub fn as_num(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Cat(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticRow {
    pub hadm_id: i64,
    pub stay_id: i64,
    pub los: f64,
    pub label: LosClass,
    pub cells: Vec<Cell>,
}

/// One engineered row per ICU stay of a selected admission.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticMart {
    pub meta: MartMeta,
    pub rows: Vec<StaticRow>,
}

impl StaticMart {
    pub fn columns(&self) -> &[MartColumn] {
        &self.meta.columns
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.meta.columns.iter().position(|c| c.name == name)
    }

    pub fn labels(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.label.code()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticMartOptions {
    pub bin_edges: BinEdges,
    pub window_hours: f64,
    /// Imputation medians fitted elsewhere; when absent they are fitted on
    /// the rows being built.
    pub medians: Option<BTreeMap<String, f64>>,
    /// Stays whose observations fit the medians (all built stays when absent).
    pub fit_stays: Option<BTreeSet<i64>>,
}

impl Default for StaticMartOptions {
    fn default() -> Self {
        StaticMartOptions {
            bin_edges: BinEdges::default(),
            window_hours: 24.0,
            medians: None,
            fit_stays: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StaticReport {
    pub stays: usize,
    pub imputed_cells: usize,
    pub unusable_events: usize,
}

/// Time-of-day bucket of an admission.
pub fn daytime_of(t: NaiveDateTime) -> &'static str {
    match t.hour() {
        0..=5 => "night",
        6..=11 => "morning",
        12..=17 => "day",
        _ => "evening",
    }
}

fn categorical(v: &str) -> Cell {
    if v.trim().is_empty() {
        Cell::Cat(String::from("UNKNOWN"))
    } else {
        Cell::Cat(v.to_string())
    }
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Builds the static mart with default options.
pub fn build_admissions_mart(raw: &RawTables, selected: &BTreeSet<i64>, tests: &[String]) -> Result<StaticMart> {
    build_admissions_mart_with(raw, selected, tests, &StaticMartOptions::default()).map(|(m, _)| m)
}

/// Builds the static mart: demographics, admission timing and per-test
/// aggregates over the first `window_hours` of each stay.
pub fn build_admissions_mart_with(
    raw: &RawTables,
    selected: &BTreeSet<i64>,
    tests: &[String],
    opts: &StaticMartOptions,
) -> Result<(StaticMart, StaticReport)> {
    opts.bin_edges.validate()?;
    if !(opts.window_hours > 0.0) {
        return Err(Error::invalid("window_hours", "must be positive"));
    }
    let channels = resolve_tests(raw, tests)?;
    let admissions: BTreeMap<i64, _> = raw.admissions.iter().map(|a| (a.hadm_id, a)).collect();
    if let Some(missing) = selected.iter().find(|h| !admissions.contains_key(h)) {
        return Err(Error::invalid(
            "selected_hadm",
            format!("admission {missing} not in admissions"),
        ));
    }
    let patients: BTreeMap<i64, _> = raw.patients.iter().map(|p| (p.subject_id, p)).collect();
    let by_item: BTreeMap<i64, usize> = channels.iter().enumerate().map(|(i, c)| (c.itemid, i)).collect();
    let mut events: BTreeMap<i64, Vec<&ChartEvent>> = BTreeMap::new();
    for e in &raw.chartevents {
        if by_item.contains_key(&e.itemid) {
            events.entry(e.stay_id).or_default().push(e);
        }
    }

    let hours = opts.window_hours;
    let suffix = if hours.fract() == 0.0 {
        format!("{}h", hours as i64)
    } else {
        format!("{hours}h")
    };
    let mut columns: Vec<MartColumn> = [
        ("gender", ColumnKind::Categorical),
        ("insurance", ColumnKind::Categorical),
        ("language", ColumnKind::Categorical),
        ("marital_status", ColumnKind::Categorical),
        ("race", ColumnKind::Categorical),
        ("anchor_age", ColumnKind::Numeric),
        ("anchor_year", ColumnKind::Numeric),
        ("first_careunit", ColumnKind::Categorical),
        ("admission_daytime", ColumnKind::Categorical),
        ("admission_month", ColumnKind::Categorical),
    ]
    .iter()
    .map(|&(n, kind)| MartColumn {
        name: n.to_string(),
        kind,
    })
    .collect();
    for ch in &channels {
        match ch.kind {
            ChannelKind::Numeric => {
                columns.push(MartColumn {
                    name: format!("{}_value_mean_{suffix}", ch.abbreviation),
                    kind: ColumnKind::Numeric,
                });
                columns.push(MartColumn {
                    name: format!("{}_in_norm_share_{suffix}", ch.abbreviation),
                    kind: ColumnKind::Numeric,
                });
            }
            ChannelKind::Categorical => columns.push(MartColumn {
                name: format!("{}_mode_{suffix}", ch.abbreviation),
                kind: ColumnKind::Categorical,
            }),
        }
    }

    let mut stays: Vec<_> = raw.icustays.iter().filter(|s| selected.contains(&s.hadm_id)).collect();
    stays.sort_by_key(|s| s.stay_id);

    let window = TimeDelta::milliseconds((hours * 3_600_000.0).round() as i64);
    let mut report = StaticReport::default();
    // Per row, per channel: mean value (None when unobserved).
    let mut pending: Vec<(StaticRow, Vec<Option<f64>>)> = Vec::with_capacity(stays.len());
    for stay in &stays {
        let adm = admissions[&stay.hadm_id];
        let patient = patients.get(&adm.subject_id).ok_or_else(|| {
            Error::invalid(
                "admissions.subject_id",
                format!(
                    "subject {} of admission {} not in patients",
                    adm.subject_id, adm.hadm_id
                ),
            )
        })?;
        let label = opts.bin_edges.bin(stay.los)?;
        let mut cells = alloc::vec![
            categorical(&patient.gender),
            categorical(&adm.insurance),
            categorical(&adm.language),
            categorical(&adm.marital_status),
            categorical(&adm.race),
            Cell::Num(patient.anchor_age as f64),
            Cell::Num(patient.anchor_year as f64),
            categorical(&stay.first_careunit),
            Cell::Cat(daytime_of(adm.admittime).to_string()),
            Cell::Cat(format!("{:02}", adm.admittime.month())),
        ];

        let end = stay.intime + window;
        let mut sums = alloc::vec![(0.0f64, 0usize, 0usize); channels.len()];
        let mut counts: Vec<BTreeMap<&str, usize>> = alloc::vec![BTreeMap::new(); channels.len()];
        for e in events.get(&stay.stay_id).map(Vec::as_slice).unwrap_or(&[]) {
            if e.charttime < stay.intime || e.charttime > end {
                continue;
            }
            let c = by_item[&e.itemid];
            let ch = &channels[c];
            match ch.kind {
                ChannelKind::Numeric => match e.value.as_number() {
                    Some(v) => {
                        sums[c].0 += v;
                        sums[c].1 += 1;
                        sums[c].2 += usize::from(ch.in_norm(v));
                    }
                    None => report.unusable_events += 1,
                },
                ChannelKind::Categorical => {
                    if let crate::tables::ChartValue::Text(t) = &e.value {
                        *counts[c].entry(t.as_str()).or_default() += 1;
                    } else {
                        report.unusable_events += 1;
                    }
                }
            }
        }
        let mut means = Vec::with_capacity(channels.len());
        for (c, ch) in channels.iter().enumerate() {
            match ch.kind {
                ChannelKind::Numeric => {
                    let (sum, n, in_norm) = sums[c];
                    if n > 0 {
                        means.push(Some(sum / n as f64));
                        cells.push(Cell::Num(f64::NAN));
                        cells.push(Cell::Num(in_norm as f64 / n as f64));
                    } else {
                        means.push(None);
                        cells.push(Cell::Num(f64::NAN));
                        cells.push(Cell::Num(1.0));
                    }
                }
                ChannelKind::Categorical => {
                    means.push(None);
                    // Most frequent level; BTreeMap order breaks ties alphabetically.
                    let mode = counts[c]
                        .iter()
                        .fold(None::<(&str, usize)>, |best, (&k, &n)| match best {
                            Some((_, bn)) if bn >= n => best,
                            _ => Some((k, n)),
                        })
                        .map_or(UNOBSERVED, |(k, _)| k);
                    cells.push(Cell::Cat(mode.to_string()));
                }
            }
        }
        pending.push((
            StaticRow {
                hadm_id: stay.hadm_id,
                stay_id: stay.stay_id,
                los: stay.los,
                label,
                cells,
            },
            means,
        ));
    }

    let value_columns: Vec<(usize, String)> = channels
        .iter()
        .enumerate()
        .filter(|(_, ch)| ch.kind == ChannelKind::Numeric)
        .map(|(c, ch)| (c, format!("{}_value_mean_{suffix}", ch.abbreviation)))
        .collect();
    let medians: BTreeMap<String, f64> = match &opts.medians {
        Some(m) => {
            for (_, name) in &value_columns {
                if !m.contains_key(name) {
                    return Err(Error::invalid("medians", format!("no median for `{name}`")));
                }
            }
            m.clone()
        }
        None => value_columns
            .iter()
            .map(|(c, name)| {
                let mut observed: Vec<f64> = pending
                    .iter()
                    .filter(|(row, _)| opts.fit_stays.as_ref().is_none_or(|s| s.contains(&row.stay_id)))
                    .filter_map(|(_, means)| means[*c])
                    .collect();
                let fallback = match (channels[*c].low, channels[*c].high) {
                    (Some(lo), Some(hi)) => 0.5 * (lo + hi),
                    (Some(v), None) | (None, Some(v)) => v,
                    (None, None) => 0.0,
                };
                (name.clone(), median(&mut observed).unwrap_or(fallback))
            })
            .collect(),
    };

    let mut rows = Vec::with_capacity(pending.len());
    for (mut row, means) in pending {
        for (c, name) in &value_columns {
            let idx = columns.iter().position(|col| &col.name == name).expect("column exists");
            row.cells[idx] = Cell::Num(match means[*c] {
                Some(v) => v,
                None => {
                    report.imputed_cells += 1;
                    medians[name]
                }
            });
        }
        rows.push(row);
    }
    report.stays = rows.len();

    let meta = MartMeta {
        schema_version: MART_SCHEMA_VERSION,
        name: String::from("admissions"),
        tests: channels,
        bin_edges: opts.bin_edges,
        medians,
        columns,
        window_hours: Some(hours),
        stays: Vec::new(),
    };
    Ok((StaticMart { meta, rows }, report))
}
