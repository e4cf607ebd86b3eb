use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::marts::{Cell, ColumnKind, StaticMart};
use crate::matrix::Matrix;

/// Where an encoded column comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FeatureSource {
    /// A numeric mart column, z-scored with the stored mean and std.
    Numeric { column: usize, mean: f64, std: f64 },
    /// Indicator of one level of a categorical mart column.
    Level { column: usize, level: String },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EncodeReport {
    /// Columns constant over the fitting rows, dropped.
    pub dropped_constant: Vec<String>,
}

/// One-hot encoder and scaler fitted on a subset of mart rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    pub mart_columns: Vec<String>,
    pub names: Vec<String>,
    pub sources: Vec<FeatureSource>,
    pub report: EncodeReport,
}

impl Encoder {
    /// Learns levels, means and (population) standard deviations from `rows`.
    pub fn fit(mart: &StaticMart, rows: &[usize]) -> Result<Encoder> {
        if rows.is_empty() {
            return Err(Error::Empty("mart rows"));
        }
        let mut names = Vec::new();
        let mut sources = Vec::new();
        let mut report = EncodeReport::default();
        for (c, col) in mart.columns().iter().enumerate() {
            match col.kind {
                ColumnKind::Numeric => {
                    let values: Vec<f64> = rows
                        .iter()
                        .map(|&r| mart.rows[r].cells[c].as_num().unwrap_or(f64::NAN))
                        .collect();
                    if values.iter().any(|v| !v.is_finite()) {
                        return Err(Error::invalid(col.name.clone(), "non-numeric or missing value"));
                    }
                    let n = values.len() as f64;
                    let mean = values.iter().sum::<f64>() / n;
                    let std = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
                    if std == 0.0 || values.iter().all(|&v| v == values[0]) {
                        report.dropped_constant.push(col.name.clone());
                        continue;
                    }
                    names.push(col.name.clone());
                    sources.push(FeatureSource::Numeric { column: c, mean, std });
                }
                ColumnKind::Categorical => {
                    let levels: BTreeSet<&str> = rows
                        .iter()
                        .map(|&r| match &mart.rows[r].cells[c] {
                            Cell::Cat(s) => Ok(s.as_str()),
                            Cell::Num(_) => {
                                Err(Error::invalid(col.name.clone(), "numeric value in categorical column"))
                            }
                        })
                        .collect::<Result<_>>()?;
                    if levels.len() < 2 {
                        report.dropped_constant.push(col.name.clone());
                        continue;
                    }
                    for level in levels {
                        names.push(format!("{}={level}", col.name));
                        sources.push(FeatureSource::Level {
                            column: c,
                            level: String::from(level),
                        });
                    }
                }
            }
        }
        if !report.dropped_constant.is_empty() {
            log::warn!("dropped constant columns: {}", report.dropped_constant.join(", "));
        }
        Ok(Encoder {
            mart_columns: mart.columns().iter().map(|c| c.name.clone()).collect(),
            names,
            sources,
            report,
        })
    }

    /// Encodes `rows` of a mart with the same column layout. Unseen levels encode as all zeros.
    pub fn transform(&self, mart: &StaticMart, rows: &[usize]) -> Result<Dataset> {
        let layout: Vec<&str> = mart.columns().iter().map(|c| c.name.as_str()).collect();
        if layout != self.mart_columns.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::Shape(String::from("mart columns differ from the fitted layout")));
        }
        let mut data = Vec::with_capacity(rows.len() * self.sources.len());
        for &r in rows {
            let cells = &mart.rows[r].cells;
            for s in &self.sources {
                data.push(match s {
                    FeatureSource::Numeric { column, mean, std } => {
                        let v = cells[*column]
                            .as_num()
                            .filter(|v| v.is_finite())
                            .ok_or_else(|| Error::invalid(self.mart_columns[*column].clone(), "missing value"))?;
                        (v - mean) / std
                    }
                    FeatureSource::Level { column, level } => match &cells[*column] {
                        Cell::Cat(v) if v == level => 1.0,
                        _ => 0.0,
                    },
                });
            }
        }
        let mut ds = Dataset::new(
            Matrix::from_vec(rows.len(), self.sources.len(), data)?,
            self.names.clone(),
            rows.iter().map(|&r| mart.rows[r].label.code()).collect(),
            crate::los::LosClass::COUNT,
        )?;
        ds.groups = Some(rows.iter().map(|&r| mart.rows[r].stay_id).collect());
        Ok(ds)
    }
}

/// Fits on every row of the mart and encodes it.
pub fn encode_and_scale(mart: &StaticMart) -> Result<(Dataset, Encoder)> {
    if mart.rows.is_empty() {
        return Err(Error::Empty("static mart"));
    }
    let rows: Vec<usize> = (0..mart.rows.len()).collect();
    let enc = Encoder::fit(mart, &rows)?;
    Ok((enc.transform(mart, &rows)?, enc))
}
