use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Dataset, Provenance};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{self, domain};

pub const DEFAULT_K_NEIGHBORS: usize = 5;

/// `a + lambda (b - a)`, coordinate-wise.
pub fn interpolate(a: &[f64], b: &[f64], lambda: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + lambda * (y - x)).collect()
}

/// Parents of one synthetic row (indices into the input dataset).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticOrigin {
    pub base: usize,
    pub neighbor: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoteOutput {
    /// Input rows followed by the synthetic rows.
    pub dataset: Dataset,
    /// One entry per appended synthetic row.
    pub origins: Vec<SyntheticOrigin>,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The `k` nearest same-class rows of every row in `members` (ties to the lower index).
fn neighbor_table(x: &Matrix, members: &[usize], k: usize) -> Vec<Vec<usize>> {
    members
        .iter()
        .map(|&i| {
            let mut d: Vec<(f64, usize)> = members
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| (squared_distance(x.row(i), x.row(j)), j))
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d.truncate(k);
            d.into_iter().map(|(_, j)| j).collect()
        })
        .collect()
}

/// Upsamples every minority class to the majority count with synthetic rows
/// on segments between a real row and one of its `k` nearest real
/// neighbours of the same class.
pub fn smote_oversample(train: &Dataset, k: usize, seed: u64) -> Result<SmoteOutput> {
    if k == 0 {
        return Err(Error::invalid("k_neighbors", "must be at least 1"));
    }
    train.validate()?;
    let real: Vec<usize> = (0..train.len())
        .filter(|&i| train.provenance[i] == Provenance::Real)
        .collect();
    let mut members: Vec<Vec<usize>> = alloc::vec![Vec::new(); train.n_classes];
    for &i in &real {
        members[train.y[i]].push(i);
    }
    let target = members.iter().map(Vec::len).max().unwrap_or(0);

    let mut out = train.clone();
    let mut origins = Vec::new();
    for (c, rows) in members.iter().enumerate() {
        let need = target - rows.len();
        if need == 0 || rows.is_empty() {
            continue;
        }
        if rows.len() <= k {
            return Err(Error::SmoteNeighbors {
                class: c,
                count: rows.len(),
                k,
            });
        }
        let table = neighbor_table(&train.x, rows, k);
        let mut rng = rng::stream(seed, domain::SMOTE, c as u64);
        for _ in 0..need {
            let b = rng.random_range(0..rows.len());
            let neighbor = table[b][rng.random_range(0..k)];
            let lambda: f64 = rng.random();
            let base = rows[b];
            out.x
                .push_row(&interpolate(train.x.row(base), train.x.row(neighbor), lambda))?;
            out.y.push(c);
            out.provenance.push(Provenance::Synthetic);
            if let Some(g) = out.groups.as_mut() {
                g.push(-1);
            }
            origins.push(SyntheticOrigin { base, neighbor, lambda });
        }
    }
    Ok(SmoteOutput { dataset: out, origins })
}
