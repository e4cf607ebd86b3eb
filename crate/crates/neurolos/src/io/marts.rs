//! Mart directories: `<dir>/<mart name>/data.csv` plus `meta.json`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use neurolos_core::marts::{
    minute_rows, Cell, ColumnKind, MartMeta, Observation, Reading, SeriesKind, SeriesMart, StaticMart, StaticRow,
    StaySeries, MART_SCHEMA_VERSION,
};
use neurolos_core::tables::seconds_between;
use neurolos_core::LosClass;

use super::{csv_reader, csv_writer, read_json, write_json};

pub const STATIC_MART: &str = "admissions_mart";

pub fn mart_dir(root: &Path, name: &str) -> PathBuf {
    root.join(name)
}

fn load_meta(dir: &Path) -> Result<MartMeta> {
    let path = dir.join("meta.json");
    if !path.is_file() {
        bail!("schema error: {} has no meta.json", dir.display());
    }
    let meta: MartMeta = read_json(&path)?;
    if meta.schema_version != MART_SCHEMA_VERSION {
        bail!(
            "schema error: {} has schema version {}, this build reads version {MART_SCHEMA_VERSION}",
            path.display(),
            meta.schema_version
        );
    }
    Ok(meta)
}

fn class_by_name(name: &str) -> Result<LosClass> {
    LosClass::ALL
        .into_iter()
        .find(|c| c.name() == name)
        .with_context(|| format!("unknown LOS class `{name}`"))
}

pub fn save_static_mart(mart: &StaticMart, root: &Path) -> Result<PathBuf> {
    let dir = mart_dir(root, STATIC_MART);
    let mut w = csv_writer(&dir.join("data.csv"))?;
    let mut header = vec!["hadm_id".to_string(), "stay_id".into(), "los".into(), "label".into()];
    header.extend(mart.columns().iter().map(|c| c.name.clone()));
    w.write_record(&header)?;
    for r in &mart.rows {
        let mut rec = vec![
            r.hadm_id.to_string(),
            r.stay_id.to_string(),
            r.los.to_string(),
            r.label.name().to_string(),
        ];
        rec.extend(r.cells.iter().map(|c| match c {
            Cell::Num(v) => v.to_string(),
            Cell::Cat(s) => s.clone(),
        }));
        w.write_record(&rec)?;
    }
    w.flush()?;
    write_json(&dir.join("meta.json"), &mart.meta)?;
    Ok(dir)
}

pub fn load_static_mart(root: &Path) -> Result<StaticMart> {
    let dir = mart_dir(root, STATIC_MART);
    let meta = load_meta(&dir)?;
    let path = dir.join("data.csv");
    let mut r = csv_reader(&path)?;
    let header = r.headers()?.clone();
    let expected: Vec<&str> = ["hadm_id", "stay_id", "los", "label"]
        .into_iter()
        .chain(meta.columns.iter().map(|c| c.name.as_str()))
        .collect();
    ensure!(
        header.iter().eq(expected.iter().copied()),
        "schema error: {} columns differ from meta.json",
        path.display()
    );
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = || format!("{} line {}", path.display(), i + 2);
        let cells = meta
            .columns
            .iter()
            .zip(rec.iter().skip(4))
            .map(|(c, v)| {
                Ok(match c.kind {
                    ColumnKind::Numeric => {
                        Cell::Num(v.parse().with_context(|| format!("{}: `{v}` in {}", line(), c.name))?)
                    }
                    ColumnKind::Categorical => Cell::Cat(v.to_string()),
                })
            })
            .collect::<Result<_>>()?;
        rows.push(StaticRow {
            hadm_id: rec[0].parse().with_context(line)?,
            stay_id: rec[1].parse().with_context(line)?,
            los: rec[2].parse().with_context(line)?,
            label: class_by_name(&rec[3]).with_context(line)?,
            cells,
        });
    }
    Ok(StaticMart { meta, rows })
}

#[derive(serde::Serialize, serde::Deserialize)]
struct SeriesLine {
    stay_id: i64,
    row: u32,
    offset_seconds: i64,
    /// Empty for a row without observations.
    test: String,
    value: Option<f64>,
    in_norm: Option<u8>,
}

pub fn save_series_mart(mart: &SeriesMart, root: &Path) -> Result<PathBuf> {
    let dir = mart_dir(root, mart.kind.mart_name());
    let mut w = csv_writer(&dir.join("data.csv"))?;
    let tests = mart.tests();
    for s in &mart.series {
        for row in 0..s.len() {
            let cells = s.row(row);
            let base = |test: String, value, in_norm| SeriesLine {
                stay_id: s.stay.stay_id,
                row: row as u32,
                offset_seconds: s.offset_seconds(row),
                test,
                value,
                in_norm,
            };
            if cells.is_empty() {
                if s.kind() == SeriesKind::Events {
                    w.serialize(base(String::new(), None, None))?;
                }
                continue;
            }
            for o in cells {
                w.serialize(base(
                    tests[o.channel as usize].abbreviation.clone(),
                    Some(o.reading.value),
                    Some(u8::from(o.reading.in_norm)),
                ))?;
            }
        }
    }
    w.flush()?;
    write_json(&dir.join("meta.json"), &mart.meta)?;
    Ok(dir)
}

pub fn load_series_mart(root: &Path, kind: SeriesKind) -> Result<SeriesMart> {
    let dir = mart_dir(root, kind.mart_name());
    let meta = load_meta(&dir)?;
    ensure!(
        meta.name == kind.mart_name(),
        "schema error: {} holds mart `{}`",
        dir.display(),
        meta.name
    );
    let channel: BTreeMap<&str, u16> = meta
        .tests
        .iter()
        .enumerate()
        .map(|(i, t)| (t.abbreviation.as_str(), i as u16))
        .collect();
    let position: BTreeMap<i64, usize> = meta.stays.iter().enumerate().map(|(i, s)| (s.stay_id, i)).collect();
    let mut offsets: Vec<BTreeMap<u32, i64>> = vec![BTreeMap::new(); meta.stays.len()];
    let mut obs: Vec<Vec<Observation>> = vec![Vec::new(); meta.stays.len()];
    let path = dir.join("data.csv");
    let mut r = csv_reader(&path)?;
    for (i, line) in r.deserialize::<SeriesLine>().enumerate() {
        let line = line.with_context(|| format!("{} line {}", path.display(), i + 2))?;
        let at = || format!("{} line {}", path.display(), i + 2);
        let &pos = position
            .get(&line.stay_id)
            .with_context(|| format!("{}: stay {} not in meta.json", at(), line.stay_id))?;
        offsets[pos].insert(line.row, line.offset_seconds);
        if line.test.is_empty() {
            continue;
        }
        let &c = channel
            .get(line.test.as_str())
            .with_context(|| format!("{}: unknown test `{}`", at(), line.test))?;
        let (Some(value), Some(flag)) = (line.value, line.in_norm) else {
            bail!("{}: observation without value", at());
        };
        obs[pos].push(Observation {
            row: line.row,
            channel: c,
            reading: Reading {
                value,
                in_norm: flag != 0,
            },
        });
    }
    let n_channels = meta.tests.len();
    let series = meta
        .stays
        .iter()
        .zip(offsets.into_iter().zip(obs))
        .map(|(stay, (offs, obs))| {
            let (rows, offsets) = match kind {
                SeriesKind::Events => {
                    let rows = offs.len();
                    ensure!(
                        offs.keys().copied().eq(0..rows as u32),
                        "{}: stay {} has gaps in its row numbers",
                        path.display(),
                        stay.stay_id
                    );
                    (rows, offs.into_values().collect())
                }
                SeriesKind::Minutes => (minute_rows(seconds_between(stay.intime, stay.outtime)), Vec::new()),
            };
            StaySeries::from_parts(stay.clone(), kind, rows, offsets, obs, n_channels).map_err(anyhow::Error::from)
        })
        .collect::<Result<_>>()?;
    Ok(SeriesMart { meta, kind, series })
}

#[cfg(test)]
mod tests {
    use super::*;
    use neurolos_core::marts::{
        build_admissions_mart, build_chartevents_by_minute, build_chartevents_original, filter_neuro_admissions,
    };
    use neurolos_core::synthgen::{generate_cohort, generated_tests, CohortSpec};

    #[test]
    fn marts_round_trip_exactly() {
        let (raw, _) = generate_cohort(&CohortSpec {
            n_patients: 25,
            seed: 3,
            ..CohortSpec::default()
        })
        .unwrap();
        let sel = filter_neuro_admissions(&raw.diagnoses_icd);
        let tests = generated_tests();
        let dir = tempfile::tempdir().unwrap();
        let st = build_admissions_mart(&raw, &sel, &tests).unwrap();
        save_static_mart(&st, dir.path()).unwrap();
        assert_eq!(load_static_mart(dir.path()).unwrap(), st);
        let (ev, _) = build_chartevents_original(&raw, &sel, &tests).unwrap();
        save_series_mart(&ev, dir.path()).unwrap();
        assert_eq!(load_series_mart(dir.path(), SeriesKind::Events).unwrap(), ev);
        let (mm, _) = build_chartevents_by_minute(&raw, &sel, &tests).unwrap();
        save_series_mart(&mm, dir.path()).unwrap();
        assert_eq!(load_series_mart(dir.path(), SeriesKind::Minutes).unwrap(), mm);
    }

    #[test]
    fn missing_or_stale_metadata_is_a_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_static_mart(dir.path()).unwrap_err();
        assert!(err.to_string().contains("schema error"), "{err}");
        let (raw, _) = generate_cohort(&CohortSpec {
            n_patients: 5,
            ..CohortSpec::default()
        })
        .unwrap();
        let mut st =
            build_admissions_mart(&raw, &filter_neuro_admissions(&raw.diagnoses_icd), &generated_tests()).unwrap();
        st.meta.schema_version = MART_SCHEMA_VERSION + 1;
        save_static_mart(&st, dir.path()).unwrap();
        let err = load_static_mart(dir.path()).unwrap_err();
        assert!(err.to_string().contains("schema version"), "{err}");
    }
}
