use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{resolve_tests, MartMeta, StayIndex, TestChannel, MART_SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::los::BinEdges;
use crate::tables::{seconds_between, RawTables, SECONDS_PER_DAY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    /// One row per distinct chart time with at least one selected test.
    Events,
    /// One row per minute from intime to outtime.
    Minutes,
}

impl SeriesKind {
    pub fn mart_name(self) -> &'static str {
        match self {
            SeriesKind::Events => "chartevents_original",
            SeriesKind::Minutes => "chartevents_by_minute",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reading {
    /// Numeric value, or the level code of a categorical channel.
    pub value: f64,
    pub in_norm: bool,
}

/// One observed cell of a series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub row: u32,
    pub channel: u16,
    pub reading: Reading,
}

/// The rows of one stay. Cells are stored sparsely, sorted by `(row, channel)`;
/// cells without an observation have mask 0 and no value.
#[derive(Debug, Clone, PartialEq)]
pub struct StaySeries {
    pub stay: StayIndex,
    kind: SeriesKind,
    rows: usize,
    /// Seconds since intime per row (event series only).
    offsets: Vec<i64>,
    obs: Vec<Observation>,
}

impl StaySeries {
    /// Assembles a series from stored parts, checking ordering and ranges.
    pub fn from_parts(
        stay: StayIndex,
        kind: SeriesKind,
        rows: usize,
        offsets: Vec<i64>,
        mut obs: Vec<Observation>,
        n_channels: usize,
    ) -> Result<StaySeries> {
        let duration = seconds_between(stay.intime, stay.outtime);
        match kind {
            SeriesKind::Events => {
                if offsets.len() != rows {
                    return Err(Error::Shape(format!(
                        "stay {}: {} offsets for {rows} rows",
                        stay.stay_id,
                        offsets.len()
                    )));
                }
                if offsets.windows(2).any(|w| w[0] >= w[1]) || offsets.iter().any(|&o| o < 0 || o >= duration) {
                    return Err(Error::invalid(
                        "offsets",
                        format!("stay {}: offsets must increase inside the stay", stay.stay_id),
                    ));
                }
            }
            SeriesKind::Minutes => {
                if rows != minute_rows(duration) || !offsets.is_empty() {
                    return Err(Error::Shape(format!(
                        "stay {}: minute grid needs {} rows",
                        stay.stay_id,
                        minute_rows(duration)
                    )));
                }
            }
        }
        obs.sort_by_key(|o| (o.row, o.channel));
        if obs
            .windows(2)
            .any(|w| (w[0].row, w[0].channel) == (w[1].row, w[1].channel))
        {
            return Err(Error::invalid(
                "cells",
                format!("stay {}: duplicate cell", stay.stay_id),
            ));
        }
        if obs
            .iter()
            .any(|o| o.row as usize >= rows || o.channel as usize >= n_channels)
        {
            return Err(Error::Shape(format!("stay {}: cell outside the grid", stay.stay_id)));
        }
        Ok(StaySeries {
            stay,
            kind,
            rows,
            offsets,
            obs,
        })
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    /// Seconds between intime and the row's timestamp.
    pub fn offset_seconds(&self, row: usize) -> i64 {
        match self.kind {
            SeriesKind::Events => self.offsets[row],
            SeriesKind::Minutes => row as i64 * 60,
        }
    }

    pub fn remaining_los_days(&self, row: usize) -> f64 {
        let duration = seconds_between(self.stay.intime, self.stay.outtime);
        (duration - self.offset_seconds(row)) as f64 / SECONDS_PER_DAY
    }

    pub fn observations(&self) -> &[Observation] {
        &self.obs
    }

    /// Observed cells of one row, by channel.
    pub fn row(&self, row: usize) -> &[Observation] {
        let r = row as u32;
        let lo = self.obs.partition_point(|o| o.row < r);
        let hi = self.obs.partition_point(|o| o.row <= r);
        &self.obs[lo..hi]
    }

    pub fn cell(&self, row: usize, channel: usize) -> Option<Reading> {
        self.row(row)
            .iter()
            .find(|o| o.channel as usize == channel)
            .map(|o| o.reading)
    }

    /// Observed `(row, reading)` pairs of one channel in time order.
    pub fn channel_points(&self, channel: usize) -> impl Iterator<Item = (usize, Reading)> + '_ {
        self.obs
            .iter()
            .filter(move |o| o.channel as usize == channel)
            .map(|o| (o.row as usize, o.reading))
    }
}

/// Series mart: one [`StaySeries`] per ICU stay of the selected admissions.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMart {
    pub meta: MartMeta,
    pub kind: SeriesKind,
    pub series: Vec<StaySeries>,
}

impl SeriesMart {
    pub fn tests(&self) -> &[TestChannel] {
        &self.meta.tests
    }

    pub fn total_rows(&self) -> usize {
        self.series.iter().map(StaySeries::len).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub stays: usize,
    pub rows: usize,
    pub observations: usize,
    /// Events whose itemid is missing from `d_items`.
    pub unknown_item_events: usize,
    /// Events charted outside `[intime, outtime)`.
    pub out_of_stay_events: usize,
    /// Events whose value cannot be read for the channel.
    pub unreadable_events: usize,
    /// Events overwritten by a later one in the same cell.
    pub superseded_events: usize,
}

/// Rows of the minute grid of a stay lasting `duration_seconds`.
pub fn minute_rows(duration_seconds: i64) -> usize {
    ((duration_seconds.max(0) + 59) / 60) as usize
}

pub fn build_chartevents_original(
    raw: &RawTables,
    selected: &BTreeSet<i64>,
    tests: &[String],
) -> Result<(SeriesMart, SeriesReport)> {
    build_series_mart(raw, selected, tests, SeriesKind::Events, BinEdges::default())
}

pub fn build_chartevents_by_minute(
    raw: &RawTables,
    selected: &BTreeSet<i64>,
    tests: &[String],
) -> Result<(SeriesMart, SeriesReport)> {
    build_series_mart(raw, selected, tests, SeriesKind::Minutes, BinEdges::default())
}

/// Builds an event or minute mart. Readings of the same cell resolve to the
/// latest charttime; equal charttimes resolve to the later input row.
pub fn build_series_mart(
    raw: &RawTables,
    selected: &BTreeSet<i64>,
    tests: &[String],
    kind: SeriesKind,
    bin_edges: BinEdges,
) -> Result<(SeriesMart, SeriesReport)> {
    bin_edges.validate()?;
    let channels = resolve_tests(raw, tests)?;
    let admissions: BTreeSet<i64> = raw.admissions.iter().map(|a| a.hadm_id).collect();
    if let Some(missing) = selected.iter().find(|h| !admissions.contains(h)) {
        return Err(Error::invalid(
            "selected_hadm",
            format!("admission {missing} not in admissions"),
        ));
    }
    let known_items: BTreeSet<i64> = raw.d_items.iter().map(|d| d.itemid).collect();
    let by_item: BTreeMap<i64, usize> = channels.iter().enumerate().map(|(i, c)| (c.itemid, i)).collect();

    let mut stays: Vec<_> = raw.icustays.iter().filter(|s| selected.contains(&s.hadm_id)).collect();
    stays.sort_by_key(|s| s.stay_id);
    let stay_pos: BTreeMap<i64, usize> = stays.iter().enumerate().map(|(i, s)| (s.stay_id, i)).collect();

    let mut report = SeriesReport::default();
    // Per stay: (offset seconds, input order, channel, reading).
    let mut pending: Vec<Vec<(i64, usize, u16, Reading)>> = alloc::vec![Vec::new(); stays.len()];
    for (order, e) in raw.chartevents.iter().enumerate() {
        let Some(&pos) = stay_pos.get(&e.stay_id) else { continue };
        if !known_items.contains(&e.itemid) {
            report.unknown_item_events += 1;
            continue;
        }
        let Some(&c) = by_item.get(&e.itemid) else { continue };
        let stay = stays[pos];
        if e.charttime < stay.intime || e.charttime >= stay.outtime {
            report.out_of_stay_events += 1;
            continue;
        }
        let ch = &channels[c];
        let Some(value) = ch.encode(&e.value) else {
            report.unreadable_events += 1;
            continue;
        };
        let reading = Reading {
            value,
            in_norm: ch.in_norm(value),
        };
        pending[pos].push((seconds_between(stay.intime, e.charttime), order, c as u16, reading));
    }
    if report.unknown_item_events > 0 {
        log::warn!("skipped {} chartevents with unknown itemid", report.unknown_item_events);
    }

    let mut series = Vec::with_capacity(stays.len());
    let mut index = Vec::with_capacity(stays.len());
    for (stay, mut events) in stays.iter().zip(pending) {
        events.sort_by_key(|&(t, order, _, _)| (t, order));
        let duration = seconds_between(stay.intime, stay.outtime);
        let idx = StayIndex {
            stay_id: stay.stay_id,
            hadm_id: stay.hadm_id,
            intime: stay.intime,
            outtime: stay.outtime,
            los: stay.los,
        };
        let mut offsets = Vec::new();
        let mut cells: BTreeMap<(u32, u16), Reading> = BTreeMap::new();
        for (t, _, c, reading) in events {
            let row = match kind {
                SeriesKind::Events => {
                    if offsets.last() != Some(&t) {
                        offsets.push(t);
                    }
                    offsets.len() - 1
                }
                SeriesKind::Minutes => (t / 60) as usize,
            };
            if cells.insert((row as u32, c), reading).is_some() {
                report.superseded_events += 1;
            }
        }
        let rows = match kind {
            SeriesKind::Events => offsets.len(),
            SeriesKind::Minutes => minute_rows(duration),
        };
        let obs: Vec<Observation> = cells
            .into_iter()
            .map(|((row, channel), reading)| Observation { row, channel, reading })
            .collect();
        report.rows += rows;
        report.observations += obs.len();
        index.push(idx.clone());
        series.push(StaySeries {
            stay: idx,
            kind,
            rows,
            offsets,
            obs,
        });
    }
    report.stays = series.len();

    let meta = MartMeta {
        schema_version: MART_SCHEMA_VERSION,
        name: String::from(kind.mart_name()),
        tests: channels,
        bin_edges,
        medians: BTreeMap::new(),
        columns: Vec::new(),
        window_hours: None,
        stays: index,
    };
    Ok((SeriesMart { meta, kind, series }, report))
}
