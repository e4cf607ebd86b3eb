//! Dense kernels shared by the sequence networks. Matrices are row-major
//! slices; weights are stored `out x in`.

use alloc::vec::Vec;
use num_traits::Float;
use rand::Rng;

/// Inner product with four running sums, which lets the loop vectorise.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    let mut acc = [0.0; 4];
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `out[n x m] = a[n x k] * w[m x k]^T (+ bias[m])`.
pub(crate) fn linear(a: &[f64], n: usize, k: usize, w: &[f64], bias: Option<&[f64]>, m: usize) -> Vec<f64> {
    let mut out = alloc::vec![0.0; n * m];
    for i in 0..n {
        let row = &a[i * k..(i + 1) * k];
        for j in 0..m {
            let wr = &w[j * k..(j + 1) * k];
            out[i * m + j] = bias.map_or(0.0, |b| b[j]) + dot(row, wr);
        }
    }
    out
}

/// Backward of [`linear`]: accumulates `dw += dout^T a` and `dbias += colsum(dout)`,
/// and returns `da = dout w`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn linear_backward(
    a: &[f64],
    n: usize,
    k: usize,
    w: &[f64],
    m: usize,
    dout: &[f64],
    dw: &mut [f64],
    dbias: Option<&mut [f64]>,
) -> Vec<f64> {
    let mut da = alloc::vec![0.0; n * k];
    for i in 0..n {
        let row = &a[i * k..(i + 1) * k];
        let drow = &mut da[i * k..(i + 1) * k];
        for j in 0..m {
            let g = dout[i * m + j];
            if g == 0.0 {
                continue;
            }
            let wr = &w[j * k..(j + 1) * k];
            let dwr = &mut dw[j * k..(j + 1) * k];
            for t in 0..k {
                dwr[t] += g * row[t];
                drow[t] += g * wr[t];
            }
        }
    }
    if let Some(db) = dbias {
        for i in 0..n {
            for j in 0..m {
                db[j] += dout[i * m + j];
            }
        }
    }
    da
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) use crate::classic::softmax_in_place as softmax;

/// Softmax cross-entropy of one example; returns the loss and writes
/// `d loss / d logits` into `dlogits`.
pub(crate) fn cross_entropy(logits: &[f64], label: usize, dlogits: &mut [f64]) -> f64 {
    dlogits.copy_from_slice(logits);
    softmax(dlogits);
    let loss = -dlogits[label].max(f64::MIN_POSITIVE).ln();
    dlogits[label] -= 1.0;
    loss
}

/// Xavier-uniform fill of an `out x in` weight block.
pub(crate) fn xavier<R: Rng + ?Sized>(rng: &mut R, w: &mut [f64], fan_in: usize, fan_out: usize) {
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    for v in w {
        *v = rng.random_range(-bound..bound);
    }
}

pub(crate) const LN_EPS: f64 = 1e-5;

/// Row-wise layer normalisation of an `n x d` block. Returns the output,
/// the normalised input and the per-row inverse standard deviations.
pub(crate) fn layer_norm(x: &[f64], n: usize, d: usize, gain: &[f64], bias: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut out = alloc::vec![0.0; n * d];
    let mut xhat = alloc::vec![0.0; n * d];
    let mut inv = alloc::vec![0.0; n];
    for i in 0..n {
        let row = &x[i * d..(i + 1) * d];
        let mu = row.iter().sum::<f64>() / d as f64;
        let var = row.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / d as f64;
        let r = 1.0 / (var + LN_EPS).sqrt();
        inv[i] = r;
        for j in 0..d {
            let h = (row[j] - mu) * r;
            xhat[i * d + j] = h;
            out[i * d + j] = gain[j] * h + bias[j];
        }
    }
    (out, xhat, inv)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn layer_norm_backward(
    dout: &[f64],
    xhat: &[f64],
    inv: &[f64],
    n: usize,
    d: usize,
    gain: &[f64],
    dgain: &mut [f64],
    dbias: &mut [f64],
) -> Vec<f64> {
    let mut dx = alloc::vec![0.0; n * d];
    let mut dxhat = alloc::vec![0.0; d];
    for i in 0..n {
        let mut mean_d = 0.0;
        let mut mean_dx = 0.0;
        for j in 0..d {
            let g = dout[i * d + j];
            dgain[j] += g * xhat[i * d + j];
            dbias[j] += g;
            dxhat[j] = g * gain[j];
            mean_d += dxhat[j];
            mean_dx += dxhat[j] * xhat[i * d + j];
        }
        mean_d /= d as f64;
        mean_dx /= d as f64;
        for j in 0..d {
            dx[i * d + j] = inv[i] * (dxhat[j] - mean_d - xhat[i * d + j] * mean_dx);
        }
    }
    dx
}

/// Named slices of a flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Block {
    pub offset: usize,
    pub len: usize,
}

impl Block {
    pub fn of<'a>(&self, p: &'a [f64]) -> &'a [f64] {
        &p[self.offset..self.offset + self.len]
    }

    pub fn of_mut<'a>(&self, p: &'a mut [f64]) -> &'a mut [f64] {
        &mut p[self.offset..self.offset + self.len]
    }
}

/// Hands out consecutive blocks.
#[derive(Debug, Default)]
pub(crate) struct Allocator {
    pub size: usize,
}

impl Allocator {
    pub fn take(&mut self, len: usize) -> Block {
        let b = Block { offset: self.size, len };
        self.size += len;
        b
    }
}
