//! Dataset plumbing between marts and models: one-hot encoding and z-scoring,
//! stratified splits and folds, SMOTE and recursive feature elimination.

mod encode;
mod rfe;
mod smote;
mod split;

pub use encode::{encode_and_scale, EncodeReport, Encoder, FeatureSource};
pub use rfe::{rfe_select, RfeConfig, RfeResult, RfeStep};
pub use smote::{interpolate, smote_oversample, SmoteOutput, SyntheticOrigin, DEFAULT_K_NEIGHBORS};
pub use split::{group_split, split_indices, stratified_folds, stratified_split, SplitSpec};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Real,
    Synthetic,
}

/// Numeric design matrix with named columns and class labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub x: Matrix,
    pub columns: Vec<String>,
    pub y: Vec<usize>,
    pub n_classes: usize,
    pub provenance: Vec<Provenance>,
    /// Stay id of each row, when rows come from stays.
    pub groups: Option<Vec<i64>>,
}

impl Dataset {
    /// A dataset of real rows.
    pub fn new(x: Matrix, columns: Vec<String>, y: Vec<usize>, n_classes: usize) -> Result<Dataset> {
        let ds = Dataset {
            provenance: alloc::vec![Provenance::Real; y.len()],
            x,
            columns,
            y,
            n_classes,
            groups: None,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.x.rows();
        if self.y.len() != n || self.provenance.len() != n || self.groups.as_ref().is_some_and(|g| g.len() != n) {
            return Err(Error::Shape(format!(
                "{n} rows, {} labels, {} provenance flags",
                self.y.len(),
                self.provenance.len()
            )));
        }
        if self.columns.len() != self.x.cols() {
            return Err(Error::Shape(format!(
                "{} column names for {} columns",
                self.columns.len(),
                self.x.cols()
            )));
        }
        if let Some(&bad) = self.y.iter().find(|&&c| c >= self.n_classes) {
            return Err(Error::invalid(
                "labels",
                format!("label {bad} outside 0..{}", self.n_classes),
            ));
        }
        if !self.x.is_finite() {
            return Err(Error::invalid("features", "contain NaN or infinite values"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0; self.n_classes];
        self.y.iter().for_each(|&c| counts[c] += 1);
        counts
    }

    pub fn select_rows(&self, idx: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(idx),
            columns: self.columns.clone(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            n_classes: self.n_classes,
            provenance: idx.iter().map(|&i| self.provenance[i]).collect(),
            groups: self.groups.as_ref().map(|g| idx.iter().map(|&i| g[i]).collect()),
        }
    }

    pub fn select_columns(&self, idx: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_columns(idx),
            columns: idx.iter().map(|&i| self.columns[i].clone()).collect(),
            ..self.clone()
        }
    }

    pub fn synthetic_count(&self) -> usize {
        self.provenance.iter().filter(|&&p| p == Provenance::Synthetic).count()
    }
}
