//! Design matrices as CSV: `stay_id, label, provenance` followed by one
//! column per feature. Synthetic rows carry stay id -1.

use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use neurolos_core::features::{Dataset, Provenance};
use neurolos_core::{LosClass, Matrix};

use super::{csv_reader, csv_writer};

const LEADING: [&str; 3] = ["stay_id", "label", "provenance"];

pub fn write_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(LEADING.iter().copied().chain(ds.columns.iter().map(String::as_str)))?;
    for i in 0..ds.len() {
        let stay = ds.groups.as_ref().map_or(-1, |g| g[i]);
        let prov = match ds.provenance[i] {
            Provenance::Real => "real",
            Provenance::Synthetic => "synthetic",
        };
        let mut rec = vec![stay.to_string(), ds.y[i].to_string(), prov.to_string()];
        rec.extend(ds.x.row(i).iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let mut r = csv_reader(path)?;
    let header = r.headers()?.clone();
    ensure!(
        header.iter().take(3).eq(LEADING),
        "{} must start with columns {}",
        path.display(),
        LEADING.join(", ")
    );
    let columns: Vec<String> = header.iter().skip(3).map(str::to_string).collect();
    let (mut data, mut y, mut prov, mut groups) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let at = || format!("{} line {}", path.display(), i + 2);
        groups.push(rec[0].parse::<i64>().with_context(at)?);
        y.push(rec[1].parse::<usize>().with_context(at)?);
        prov.push(match &rec[2] {
            "real" => Provenance::Real,
            "synthetic" => Provenance::Synthetic,
            other => bail!("{}: unknown provenance `{other}`", at()),
        });
        for v in rec.iter().skip(3) {
            data.push(v.parse::<f64>().with_context(|| format!("{}: `{v}`", at()))?);
        }
    }
    let n = y.len();
    let mut ds = Dataset::new(Matrix::from_vec(n, columns.len(), data)?, columns, y, LosClass::COUNT)?;
    ds.provenance = prov;
    ds.groups = Some(groups);
    Ok(ds)
}
