//! `CREATE TABLE` statements mirroring the CSV layouts.

use std::fmt::Write;

use neurolos_core::marts::{ColumnKind, MartMeta, SeriesKind};

use super::marts::STATIC_MART;

const RAW: [(&str, &[(&str, &str)]); 6] = [
    (
        "admissions",
        &[
            ("subject_id", "BIGINT NOT NULL"),
            ("hadm_id", "BIGINT PRIMARY KEY"),
            ("admittime", "TIMESTAMP NOT NULL"),
            ("dischtime", "TIMESTAMP NOT NULL"),
            ("deathtime", "TIMESTAMP"),
            ("insurance", "TEXT"),
            ("language", "TEXT"),
            ("marital_status", "TEXT"),
            ("race", "TEXT"),
        ],
    ),
    (
        "patients",
        &[
            ("subject_id", "BIGINT PRIMARY KEY"),
            ("gender", "TEXT NOT NULL"),
            ("anchor_age", "INTEGER NOT NULL"),
            ("anchor_year", "INTEGER NOT NULL"),
            ("anchor_year_group", "TEXT"),
            ("dod", "DATE"),
        ],
    ),
    (
        "icustays",
        &[
            ("subject_id", "BIGINT NOT NULL"),
            ("hadm_id", "BIGINT NOT NULL"),
            ("stay_id", "BIGINT PRIMARY KEY"),
            ("first_careunit", "TEXT"),
            ("last_careunit", "TEXT"),
            ("intime", "TIMESTAMP NOT NULL"),
            ("outtime", "TIMESTAMP NOT NULL"),
            ("los", "DOUBLE PRECISION NOT NULL"),
        ],
    ),
    (
        "diagnoses_icd",
        &[
            ("subject_id", "BIGINT NOT NULL"),
            ("hadm_id", "BIGINT NOT NULL"),
            ("seq_num", "INTEGER NOT NULL"),
            ("icd_code", "TEXT NOT NULL"),
            ("icd_version", "INTEGER NOT NULL"),
        ],
    ),
    (
        "chartevents",
        &[
            ("subject_id", "BIGINT NOT NULL"),
            ("hadm_id", "BIGINT NOT NULL"),
            ("stay_id", "BIGINT NOT NULL"),
            ("charttime", "TIMESTAMP NOT NULL"),
            ("itemid", "BIGINT NOT NULL"),
            ("value", "TEXT"),
            ("valuenum", "DOUBLE PRECISION"),
            ("valueuom", "TEXT"),
        ],
    ),
    (
        "d_items",
        &[
            ("itemid", "BIGINT PRIMARY KEY"),
            ("label", "TEXT NOT NULL"),
            ("abbreviation", "TEXT NOT NULL"),
            ("category", "TEXT"),
            ("unitname", "TEXT"),
            ("lownormalvalue", "DOUBLE PRECISION"),
            ("highnormalvalue", "DOUBLE PRECISION"),
        ],
    ),
];

const SERIES: [(&str, &str); 6] = [
    ("stay_id", "BIGINT NOT NULL"),
    ("row", "INTEGER NOT NULL"),
    ("offset_seconds", "BIGINT NOT NULL"),
    ("test", "TEXT"),
    ("value", "DOUBLE PRECISION"),
    ("in_norm", "SMALLINT"),
];

fn quote(name: &str) -> String {
    format!("\"{}\"", name.replace('"', "\"\""))
}

fn table(out: &mut String, name: &str, columns: &[(String, String)]) {
    writeln!(out, "CREATE TABLE {} (", quote(name)).unwrap();
    for (i, (c, ty)) in columns.iter().enumerate() {
        let sep = if i + 1 < columns.len() { "," } else { "" };
        writeln!(out, "    {} {ty}{sep}", quote(c)).unwrap();
    }
    out.push_str(");\n\n");
}

fn owned(cols: &[(&str, &str)]) -> Vec<(String, String)> {
    cols.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

/// DDL for the raw tables, the static mart described by `static_meta` and
/// the given series marts.
pub fn ddl(static_meta: &MartMeta, series: &[SeriesKind]) -> String {
    let mut out = String::new();
    for (name, cols) in RAW {
        table(&mut out, name, &owned(cols));
    }
    let mut cols = owned(&[
        ("hadm_id", "BIGINT NOT NULL"),
        ("stay_id", "BIGINT PRIMARY KEY"),
        ("los", "DOUBLE PRECISION NOT NULL"),
        ("label", "TEXT NOT NULL"),
    ]);
    cols.extend(static_meta.columns.iter().map(|c| {
        let ty = match c.kind {
            ColumnKind::Numeric => "DOUBLE PRECISION NOT NULL",
            ColumnKind::Categorical => "TEXT NOT NULL",
        };
        (c.name.clone(), ty.to_string())
    }));
    table(&mut out, STATIC_MART, &cols);
    for kind in series {
        table(&mut out, kind.mart_name(), &owned(&SERIES));
    }
    out.truncate(out.trim_end().len());
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use neurolos_core::marts::{build_admissions_mart, filter_neuro_admissions};
    use neurolos_core::synthgen::{generate_cohort, generated_tests, CohortSpec};

    #[test]
    fn one_statement_per_table_with_every_mart_column() {
        let (raw, _) = generate_cohort(&CohortSpec {
            n_patients: 10,
            ..CohortSpec::default()
        })
        .unwrap();
        let mart =
            build_admissions_mart(&raw, &filter_neuro_admissions(&raw.diagnoses_icd), &generated_tests()).unwrap();
        let sql = ddl(&mart.meta, &[SeriesKind::Events, SeriesKind::Minutes]);
        assert_eq!(sql.matches("CREATE TABLE").count(), 9);
        for c in &mart.meta.columns {
            assert!(sql.contains(&quote(&c.name)), "{}", c.name);
        }
        assert!(sql.contains("CREATE TABLE \"chartevents_by_minute\""));
    }
}
