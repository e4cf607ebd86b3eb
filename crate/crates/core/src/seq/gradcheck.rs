use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{nn, SequenceNet};
use crate::error::Result;
use crate::matrix::Matrix;

/// Smallest denominator in the relative error, so parameters with a
/// vanishing gradient are judged by absolute error instead.
pub const RELATIVE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheck {
    /// `max_j |a_j - n_j| / max(|a_j|, |n_j|, RELATIVE_FLOOR)`.
    pub max_relative_error: f64,
    pub worst_parameter: usize,
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
}

fn loss<N: SequenceNet + ?Sized>(net: &N, x: &Matrix, label: usize) -> Result<f64> {
    let mut d = alloc::vec![0.0; net.n_classes()];
    Ok(nn::cross_entropy(&net.logits(x)?, label, &mut d))
}

/// Compares the analytic gradient of the cross-entropy loss with central
/// differences `(L(p + h) - L(p - h)) / 2h` over every parameter.
pub fn check_gradient<N: SequenceNet + Clone>(net: &N, x: &Matrix, label: usize, h: f64) -> Result<GradCheck> {
    let mut analytic = alloc::vec![0.0; net.params().len()];
    net.loss_grad(x, label, &mut analytic)?;
    let mut probe = net.clone();
    let mut numeric = Vec::with_capacity(analytic.len());
    for j in 0..analytic.len() {
        let p = probe.params()[j];
        probe.params_mut()[j] = p + h;
        let up = loss(&probe, x, label)?;
        probe.params_mut()[j] = p - h;
        let down = loss(&probe, x, label)?;
        probe.params_mut()[j] = p;
        numeric.push((up - down) / (2.0 * h));
    }
    let mut worst = (0.0, 0);
    for (j, (a, n)) in analytic.iter().zip(&numeric).enumerate() {
        let e = (a - n).abs() / a.abs().max(n.abs()).max(RELATIVE_FLOOR);
        if e > worst.0 {
            worst = (e, j);
        }
    }
    Ok(GradCheck {
        max_relative_error: worst.0,
        worst_parameter: worst.1,
        analytic,
        numeric,
    })
}
