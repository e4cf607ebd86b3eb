//! Data marts derived from the raw tables.
//!
//! * the static admissions mart: one engineered row per ICU stay,
//! * the event mart: one row per distinct chart time of a stay,
//! * the minute mart: one row per minute of a stay.
//!
//! Marts are plain values; persistence lives in the I/O crate.

mod filter;
mod series;
mod static_mart;

pub use filter::{filter_neuro_admissions, like, NeuroFilter, NEURO_PATTERNS};
pub use series::{
    build_chartevents_by_minute, build_chartevents_original, build_series_mart, minute_rows, Observation, Reading,
    SeriesKind, SeriesMart, SeriesReport, StaySeries,
};
pub use static_mart::{
    build_admissions_mart, build_admissions_mart_with, daytime_of, Cell, ColumnKind, MartColumn, StaticMart,
    StaticMartOptions, StaticReport, StaticRow, UNOBSERVED,
};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tables::{ChartValue, RawTables};

/// Version of the mart layout written to `meta.json`.
pub const MART_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Numeric,
    Categorical,
}

/// A selected test resolved against `d_items`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestChannel {
    pub abbreviation: String,
    pub itemid: i64,
    pub kind: ChannelKind,
    pub low: Option<f64>,
    pub high: Option<f64>,
    /// Category vocabulary (sorted); empty for numeric channels.
    pub levels: Vec<String>,
}

impl TestChannel {
    pub fn in_norm(&self, value: f64) -> bool {
        if self.kind == ChannelKind::Categorical {
            return true;
        }
        self.low.is_none_or(|lo| lo <= value) && self.high.is_none_or(|hi| value <= hi)
    }

    /// Numeric reading of a charted value: the number itself, or the
    /// category's code for categorical channels.
    pub fn encode(&self, value: &ChartValue) -> Option<f64> {
        match (self.kind, value) {
            (ChannelKind::Numeric, ChartValue::Number(v)) => Some(*v),
            (ChannelKind::Numeric, ChartValue::Text(_)) => None,
            (ChannelKind::Categorical, v) => {
                let text = match v {
                    ChartValue::Text(t) => t.clone(),
                    ChartValue::Number(n) => alloc::format!("{n}"),
                };
                self.levels.binary_search(&text).ok().map(|i| i as f64)
            }
        }
    }
}

/// Resolves test abbreviations to channels. Items without normal bounds that
/// carry text values become categorical channels.
pub fn resolve_tests(raw: &RawTables, tests: &[String]) -> Result<Vec<TestChannel>> {
    let by_abbr = raw.item_by_abbreviation();
    let unknown: Vec<String> = tests
        .iter()
        .filter(|t| !by_abbr.contains_key(t.as_str()))
        .cloned()
        .collect();
    if !unknown.is_empty() {
        return Err(Error::UnknownTests(unknown));
    }
    let mut seen = BTreeSet::new();
    if let Some(dup) = tests.iter().find(|t| !seen.insert(t.as_str())) {
        return Err(Error::invalid("tests", alloc::format!("`{dup}` listed twice")));
    }

    let mut text_levels: BTreeMap<i64, BTreeSet<String>> = BTreeMap::new();
    for e in &raw.chartevents {
        if let ChartValue::Text(t) = &e.value {
            text_levels.entry(e.itemid).or_default().insert(t.clone());
        }
    }
    Ok(tests
        .iter()
        .map(|t| {
            let item = by_abbr[t.as_str()];
            let unbounded = item.lownormalvalue.is_none() && item.highnormalvalue.is_none();
            let levels = text_levels.get(&item.itemid);
            let kind = if unbounded && levels.is_some() {
                ChannelKind::Categorical
            } else {
                ChannelKind::Numeric
            };
            TestChannel {
                abbreviation: t.to_string(),
                itemid: item.itemid,
                kind,
                low: item.lownormalvalue,
                high: item.highnormalvalue,
                levels: match kind {
                    ChannelKind::Categorical => levels.map(|l| l.iter().cloned().collect()).unwrap_or_default(),
                    ChannelKind::Numeric => Vec::new(),
                },
            }
        })
        .collect())
}

/// Stay-level facts a series mart needs to reproduce itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StayIndex {
    pub stay_id: i64,
    pub hadm_id: i64,
    pub intime: chrono::NaiveDateTime,
    pub outtime: chrono::NaiveDateTime,
    pub los: f64,
}

/// Metadata stored alongside a mart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartMeta {
    pub schema_version: u32,
    pub name: String,
    pub tests: Vec<TestChannel>,
    pub bin_edges: crate::los::BinEdges,
    /// Imputation medians per numeric column (static mart only).
    #[serde(default)]
    pub medians: BTreeMap<String, f64>,
    /// Column order of the static mart.
    #[serde(default)]
    pub columns: Vec<MartColumn>,
    /// Aggregation window of the static mart, in hours.
    #[serde(default)]
    pub window_hours: Option<f64>,
    /// Stays covered by a series mart.
    #[serde(default)]
    pub stays: Vec<StayIndex>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthgen::{generate_cohort, CohortSpec};

    #[test]
    fn resolves_kinds_and_rejects_unknown() {
        let (raw, _) = generate_cohort(&CohortSpec {
            n_patients: 20,
            ..CohortSpec::default()
        })
        .unwrap();
        let tests = [String::from("HR"), String::from("Ventilator Mode")];
        let ch = resolve_tests(&raw, &tests).unwrap();
        assert_eq!(ch[0].kind, ChannelKind::Numeric);
        assert_eq!(ch[1].kind, ChannelKind::Categorical);
        assert!(!ch[1].levels.is_empty());
        let bad = [String::from("HR"), String::from("Nope"), String::from("Zzz")];
        match resolve_tests(&raw, &bad) {
            Err(Error::UnknownTests(names)) => assert_eq!(names, ["Nope", "Zzz"]),
            other => panic!("unexpected {other:?}"),
        }
    }
}
