//! In-memory image of the six MIMIC-shaped source tables.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use chrono::{NaiveDate, NaiveDateTime};

use crate::error::{Error, Result};

pub const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Admission {
    pub subject_id: i64,
    pub hadm_id: i64,
    pub admittime: NaiveDateTime,
    pub dischtime: NaiveDateTime,
    pub deathtime: Option<NaiveDateTime>,
    pub insurance: String,
    pub language: String,
    pub marital_status: String,
    pub race: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Patient {
    pub subject_id: i64,
    pub gender: String,
    pub anchor_age: i64,
    pub anchor_year: i64,
    pub anchor_year_group: String,
    pub dod: Option<NaiveDate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcuStay {
    pub stay_id: i64,
    pub hadm_id: i64,
    pub first_careunit: String,
    pub last_careunit: String,
    pub intime: NaiveDateTime,
    pub outtime: NaiveDateTime,
    /// Fractional days.
    pub los: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosisIcd {
    pub hadm_id: i64,
    pub seq_num: i64,
    pub icd_code: String,
    pub icd_version: i64,
}

/// A charted value: numeric readings or free-text categories.
#[derive(Debug, Clone, PartialEq)]
pub enum ChartValue {
    Number(f64),
    Text(String),
}

impl ChartValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            ChartValue::Number(v) => Some(*v),
            ChartValue::Text(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartEvent {
    pub stay_id: i64,
    pub hadm_id: i64,
    pub charttime: NaiveDateTime,
    pub itemid: i64,
    pub value: ChartValue,
    pub valueuom: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DItem {
    pub itemid: i64,
    pub label: String,
    pub abbreviation: String,
    pub lownormalvalue: Option<f64>,
    pub highnormalvalue: Option<f64>,
    pub category: String,
    pub unitname: Option<String>,
}

impl DItem {
    /// In-norm flag for a value; an item without bounds treats every value as in norm.
    pub fn in_norm(&self, value: f64) -> bool {
        match (self.lownormalvalue, self.highnormalvalue) {
            (Some(lo), Some(hi)) => lo <= value && value <= hi,
            (Some(lo), None) => lo <= value,
            (None, Some(hi)) => value <= hi,
            (None, None) => true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawTables {
    pub admissions: Vec<Admission>,
    pub patients: Vec<Patient>,
    pub icustays: Vec<IcuStay>,
    pub diagnoses_icd: Vec<DiagnosisIcd>,
    pub chartevents: Vec<ChartEvent>,
    pub d_items: Vec<DItem>,
}

/// Seconds from `from` to `to`.
pub fn seconds_between(from: NaiveDateTime, to: NaiveDateTime) -> i64 {
    (to - from).num_seconds()
}

pub fn days_between(from: NaiveDateTime, to: NaiveDateTime) -> f64 {
    seconds_between(from, to) as f64 / SECONDS_PER_DAY
}

impl RawTables {
    /// Checks key uniqueness, stay ordering and referential integrity.
    pub fn validate(&self) -> Result<()> {
        let hadm: BTreeSet<i64> = self.admissions.iter().map(|a| a.hadm_id).collect();
        if hadm.len() != self.admissions.len() {
            return Err(Error::invalid("admissions.hadm_id", "duplicate keys"));
        }
        let subjects: BTreeSet<i64> = self.patients.iter().map(|p| p.subject_id).collect();
        if subjects.len() != self.patients.len() {
            return Err(Error::invalid("patients.subject_id", "duplicate keys"));
        }
        if let Some(a) = self.admissions.iter().find(|a| !subjects.contains(&a.subject_id)) {
            return Err(Error::invalid(
                "admissions.subject_id",
                format!("subject {} of admission {} not in patients", a.subject_id, a.hadm_id),
            ));
        }
        let mut stays = BTreeSet::new();
        for s in &self.icustays {
            if !stays.insert(s.stay_id) {
                return Err(Error::invalid(
                    "icustays.stay_id",
                    format!("duplicate key {}", s.stay_id),
                ));
            }
            if !hadm.contains(&s.hadm_id) {
                return Err(Error::invalid(
                    "icustays.hadm_id",
                    format!("stay {} references unknown admission {}", s.stay_id, s.hadm_id),
                ));
            }
            if s.intime >= s.outtime || !(s.los > 0.0) {
                return Err(Error::invalid(
                    "icustays.los",
                    format!("stay {} needs intime < outtime and los > 0", s.stay_id),
                ));
            }
        }
        if let Some(d) = self.diagnoses_icd.iter().find(|d| !hadm.contains(&d.hadm_id)) {
            return Err(Error::invalid(
                "diagnoses_icd.hadm_id",
                format!("unknown admission {}", d.hadm_id),
            ));
        }
        let items: BTreeSet<i64> = self.d_items.iter().map(|d| d.itemid).collect();
        if items.len() != self.d_items.len() {
            return Err(Error::invalid("d_items.itemid", "duplicate keys"));
        }
        if let Some(e) = self
            .chartevents
            .iter()
            .find(|e| !hadm.contains(&e.hadm_id) || !stays.contains(&e.stay_id))
        {
            return Err(Error::invalid(
                "chartevents.stay_id",
                format!("event references unknown stay {} / admission {}", e.stay_id, e.hadm_id),
            ));
        }
        Ok(())
    }

    pub fn item_by_abbreviation(&self) -> BTreeMap<&str, &DItem> {
        self.d_items.iter().map(|d| (d.abbreviation.as_str(), d)).collect()
    }
}
