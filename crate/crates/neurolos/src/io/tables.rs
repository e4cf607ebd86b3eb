//! Raw tables as comma-separated files with a header row.

use std::path::Path;

use anyhow::{bail, Context, Result};
use neurolos_core::synthgen::{AdmissionTruth, GroundTruth};
use neurolos_core::tables::{Admission, ChartEvent, ChartValue, DItem, DiagnosisIcd, IcuStay, Patient, RawTables};
use serde::{Deserialize, Serialize};

use super::{csv_reader, csv_writer, format_time, parse_time};

pub const TABLE_NAMES: [&str; 6] = [
    "admissions",
    "patients",
    "icustays",
    "diagnoses_icd",
    "chartevents",
    "d_items",
];
pub const GROUND_TRUTH: &str = "ground_truth";

#[derive(Serialize, Deserialize)]
struct AdmissionRow {
    subject_id: i64,
    hadm_id: i64,
    admittime: String,
    dischtime: String,
    deathtime: Option<String>,
    insurance: String,
    language: String,
    marital_status: String,
    race: String,
}

#[derive(Serialize, Deserialize)]
struct PatientRow {
    subject_id: i64,
    gender: String,
    anchor_age: i64,
    anchor_year: i64,
    anchor_year_group: String,
    dod: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct IcuStayRow {
    subject_id: i64,
    hadm_id: i64,
    stay_id: i64,
    first_careunit: String,
    last_careunit: String,
    intime: String,
    outtime: String,
    los: f64,
}

#[derive(Serialize, Deserialize)]
struct DiagnosisRow {
    subject_id: i64,
    hadm_id: i64,
    seq_num: i64,
    icd_code: String,
    icd_version: i64,
}

#[derive(Serialize, Deserialize)]
struct ChartEventRow {
    subject_id: i64,
    hadm_id: i64,
    stay_id: i64,
    charttime: String,
    itemid: i64,
    value: String,
    valuenum: Option<f64>,
    valueuom: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct DItemRow {
    itemid: i64,
    label: String,
    abbreviation: String,
    category: String,
    unitname: Option<String>,
    lownormalvalue: Option<f64>,
    highnormalvalue: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct TruthRow {
    hadm_id: i64,
    p_short: f64,
    p_medium: f64,
    p_long: f64,
    severity: f64,
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv_writer(path)?;
    for r in rows {
        w.serialize(r).with_context(|| format!("writing {}", path.display()))?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv_reader(path)?;
    r.deserialize()
        .enumerate()
        .map(|(i, row)| row.with_context(|| format!("{} line {}", path.display(), i + 2)))
        .collect()
}

pub fn table_path(dir: &Path, name: &str) -> std::path::PathBuf {
    dir.join(format!("{name}.csv"))
}

/// Writes the six tables, one file each. The `subject_id` columns of the
/// dependent tables are filled in from the admissions.
pub fn emit_tables(raw: &RawTables, dir: &Path) -> Result<()> {
    let subject: std::collections::BTreeMap<i64, i64> =
        raw.admissions.iter().map(|a| (a.hadm_id, a.subject_id)).collect();
    let subject_of = |hadm: i64| -> Result<i64> {
        subject
            .get(&hadm)
            .copied()
            .with_context(|| format!("admission {hadm} missing from admissions"))
    };
    write_rows(
        &table_path(dir, "admissions"),
        raw.admissions.iter().map(|a| AdmissionRow {
            subject_id: a.subject_id,
            hadm_id: a.hadm_id,
            admittime: format_time(&a.admittime),
            dischtime: format_time(&a.dischtime),
            deathtime: a.deathtime.as_ref().map(format_time),
            insurance: a.insurance.clone(),
            language: a.language.clone(),
            marital_status: a.marital_status.clone(),
            race: a.race.clone(),
        }),
    )?;
    write_rows(
        &table_path(dir, "patients"),
        raw.patients.iter().map(|p| PatientRow {
            subject_id: p.subject_id,
            gender: p.gender.clone(),
            anchor_age: p.anchor_age,
            anchor_year: p.anchor_year,
            anchor_year_group: p.anchor_year_group.clone(),
            dod: p.dod.map(|d| d.format("%Y-%m-%d").to_string()),
        }),
    )?;
    let stays = raw
        .icustays
        .iter()
        .map(|s| {
            Ok(IcuStayRow {
                subject_id: subject_of(s.hadm_id)?,
                hadm_id: s.hadm_id,
                stay_id: s.stay_id,
                first_careunit: s.first_careunit.clone(),
                last_careunit: s.last_careunit.clone(),
                intime: format_time(&s.intime),
                outtime: format_time(&s.outtime),
                los: s.los,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_rows(&table_path(dir, "icustays"), stays)?;
    let dx = raw
        .diagnoses_icd
        .iter()
        .map(|d| {
            Ok(DiagnosisRow {
                subject_id: subject_of(d.hadm_id)?,
                hadm_id: d.hadm_id,
                seq_num: d.seq_num,
                icd_code: d.icd_code.clone(),
                icd_version: d.icd_version,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_rows(&table_path(dir, "diagnoses_icd"), dx)?;
    let mut w = csv_writer(&table_path(dir, "chartevents"))?;
    for e in &raw.chartevents {
        let (value, valuenum) = match &e.value {
            ChartValue::Number(v) => (v.to_string(), Some(*v)),
            ChartValue::Text(t) => (t.clone(), None),
        };
        w.serialize(ChartEventRow {
            subject_id: subject_of(e.hadm_id)?,
            hadm_id: e.hadm_id,
            stay_id: e.stay_id,
            charttime: format_time(&e.charttime),
            itemid: e.itemid,
            value,
            valuenum,
            valueuom: e.valueuom.clone(),
        })?;
    }
    w.flush()?;
    write_rows(
        &table_path(dir, "d_items"),
        raw.d_items.iter().map(|d| DItemRow {
            itemid: d.itemid,
            label: d.label.clone(),
            abbreviation: d.abbreviation.clone(),
            category: d.category.clone(),
            unitname: d.unitname.clone(),
            lownormalvalue: d.lownormalvalue,
            highnormalvalue: d.highnormalvalue,
        }),
    )
}

pub fn read_tables(dir: &Path) -> Result<RawTables> {
    for name in TABLE_NAMES {
        let p = table_path(dir, name);
        if !p.is_file() {
            bail!("missing table {}", p.display());
        }
    }
    let admissions = read_rows::<AdmissionRow>(&table_path(dir, "admissions"))?
        .into_iter()
        .map(|r| {
            Ok(Admission {
                subject_id: r.subject_id,
                hadm_id: r.hadm_id,
                admittime: parse_time(&r.admittime)?,
                dischtime: parse_time(&r.dischtime)?,
                deathtime: r.deathtime.as_deref().map(parse_time).transpose()?,
                insurance: r.insurance,
                language: r.language,
                marital_status: r.marital_status,
                race: r.race,
            })
        })
        .collect::<Result<_>>()?;
    let patients = read_rows::<PatientRow>(&table_path(dir, "patients"))?
        .into_iter()
        .map(|r| {
            Ok(Patient {
                subject_id: r.subject_id,
                gender: r.gender,
                anchor_age: r.anchor_age,
                anchor_year: r.anchor_year,
                anchor_year_group: r.anchor_year_group,
                dod: r
                    .dod
                    .as_deref()
                    .map(|d| {
                        chrono::NaiveDate::parse_from_str(d, "%Y-%m-%d").with_context(|| format!("bad date `{d}`"))
                    })
                    .transpose()?,
            })
        })
        .collect::<Result<_>>()?;
    let icustays = read_rows::<IcuStayRow>(&table_path(dir, "icustays"))?
        .into_iter()
        .map(|r| {
            Ok(IcuStay {
                stay_id: r.stay_id,
                hadm_id: r.hadm_id,
                first_careunit: r.first_careunit,
                last_careunit: r.last_careunit,
                intime: parse_time(&r.intime)?,
                outtime: parse_time(&r.outtime)?,
                los: r.los,
            })
        })
        .collect::<Result<_>>()?;
    let diagnoses_icd = read_rows::<DiagnosisRow>(&table_path(dir, "diagnoses_icd"))?
        .into_iter()
        .map(|r| DiagnosisIcd {
            hadm_id: r.hadm_id,
            seq_num: r.seq_num,
            icd_code: r.icd_code,
            icd_version: r.icd_version,
        })
        .collect();
    let chartevents = read_rows::<ChartEventRow>(&table_path(dir, "chartevents"))?
        .into_iter()
        .map(|r| {
            Ok(ChartEvent {
                stay_id: r.stay_id,
                hadm_id: r.hadm_id,
                charttime: parse_time(&r.charttime)?,
                itemid: r.itemid,
                value: match r.valuenum {
                    Some(v) => ChartValue::Number(v),
                    None => ChartValue::Text(r.value),
                },
                valueuom: r.valueuom,
            })
        })
        .collect::<Result<_>>()?;
    let d_items = read_rows::<DItemRow>(&table_path(dir, "d_items"))?
        .into_iter()
        .map(|r| DItem {
            itemid: r.itemid,
            label: r.label,
            abbreviation: r.abbreviation,
            lownormalvalue: r.lownormalvalue,
            highnormalvalue: r.highnormalvalue,
            category: r.category,
            unitname: r.unitname,
        })
        .collect();
    Ok(RawTables {
        admissions,
        patients,
        icustays,
        diagnoses_icd,
        chartevents,
        d_items,
    })
}

pub fn write_ground_truth(truth: &GroundTruth, dir: &Path) -> Result<()> {
    write_rows(
        &table_path(dir, GROUND_TRUTH),
        truth.admissions.iter().map(|a| TruthRow {
            hadm_id: a.hadm_id,
            p_short: a.probabilities[0],
            p_medium: a.probabilities[1],
            p_long: a.probabilities[2],
            severity: a.severity,
        }),
    )
}

pub fn read_ground_truth(dir: &Path) -> Result<GroundTruth> {
    Ok(GroundTruth {
        admissions: read_rows::<TruthRow>(&table_path(dir, GROUND_TRUTH))?
            .into_iter()
            .map(|r| AdmissionTruth {
                hadm_id: r.hadm_id,
                probabilities: [r.p_short, r.p_medium, r.p_long],
                severity: r.severity,
            })
            .collect(),
    })
}
