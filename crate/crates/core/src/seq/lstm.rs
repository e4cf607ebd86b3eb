//! Single-layer LSTM classifier reading the final hidden state.
//!
//! Per step, with `u = [x_t, h_{t-1}]`:
//! `f = σ(W_f u + b_f)`, `i = σ(W_i u + b_i)`, `g = tanh(W_C u + b_C)`,
//! `o = σ(W_o u + b_o)`, `C_t = f * C_{t-1} + i * g`, `h_t = o * tanh(C_t)`.

use alloc::vec::Vec;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::nn::{self, Allocator, Block};
use super::SequenceNet;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{self, domain};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LstmConfig {
    pub hidden: usize,
    /// Initial forget-gate bias.
    pub forget_bias: f64,
}

impl Default for LstmConfig {
    fn default() -> Self {
        LstmConfig {
            hidden: 64,
            forget_bias: 1.0,
        }
    }
}

impl LstmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(Error::invalid("hidden", "must be at least 1"));
        }
        if !self.forget_bias.is_finite() {
            return Err(Error::invalid("forget_bias", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Layout {
    /// `W_f, W_i, W_C, W_o` stacked: `4H x (D + H)`.
    w: Block,
    b: Block,
    head_w: Block,
    head_b: Block,
    size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lstm {
    pub config: LstmConfig,
    pub input_dim: usize,
    pub n_classes: usize,
    pub params: Vec<f64>,
}

/// Cell states, hidden states and candidates `C̃_t` of a forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmTrace {
    pub cell: Vec<Vec<f64>>,
    pub hidden: Vec<Vec<f64>>,
    pub candidate: Vec<Vec<f64>>,
    /// Gate activations `[f, i, g, o]` per step, `4H` each.
    gates: Vec<Vec<f64>>,
}

impl Lstm {
    fn layout(&self) -> Layout {
        layout(self.input_dim, self.config.hidden, self.n_classes)
    }

    /// Xavier-initialised weights, zero biases except the forget gate.
    pub fn new(config: LstmConfig, input_dim: usize, n_classes: usize, seed: u64) -> Result<Lstm> {
        config.validate()?;
        if input_dim == 0 || n_classes == 0 {
            return Err(Error::invalid("input_dim", "input and class counts must be positive"));
        }
        let h = config.hidden;
        let l = layout(input_dim, h, n_classes);
        let mut params = alloc::vec![0.0; l.size];
        let mut rng = rng::stream(seed, domain::INIT, 0);
        let w = l.w.of_mut(&mut params);
        for gate in 0..4 {
            nn::xavier(
                &mut rng,
                &mut w[gate * h * (input_dim + h)..(gate + 1) * h * (input_dim + h)],
                input_dim + h,
                h,
            );
        }
        l.b.of_mut(&mut params)[..h].fill(config.forget_bias);
        nn::xavier(&mut rng, l.head_w.of_mut(&mut params), h, n_classes);
        Ok(Lstm {
            config,
            input_dim,
            n_classes,
            params,
        })
    }

    fn check(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.input_dim {
            return Err(Error::Shape(alloc::format!(
                "{} input channels, model expects {}",
                x.cols(),
                self.input_dim
            )));
        }
        if x.rows() == 0 {
            return Err(Error::Empty("sequence"));
        }
        if self.params.len() != self.layout().size {
            return Err(Error::Shape(alloc::format!(
                "{} parameters, layout needs {}",
                self.params.len(),
                self.layout().size
            )));
        }
        Ok(())
    }

    pub fn trace(&self, x: &Matrix) -> Result<LstmTrace> {
        self.check(x)?;
        let (d, h) = (self.input_dim, self.config.hidden);
        let l = self.layout();
        let w = l.w.of(&self.params);
        let b = l.b.of(&self.params);
        let mut c = alloc::vec![0.0; h];
        let mut hs = alloc::vec![0.0; h];
        let mut t = LstmTrace {
            cell: Vec::with_capacity(x.rows()),
            hidden: Vec::with_capacity(x.rows()),
            candidate: Vec::with_capacity(x.rows()),
            gates: Vec::with_capacity(x.rows()),
        };
        let mut u = alloc::vec![0.0; d + h];
        for row in x.iter_rows() {
            u[..d].copy_from_slice(row);
            u[d..].copy_from_slice(&hs);
            let mut z = nn::linear(&u, 1, d + h, w, Some(b), 4 * h);
            for k in 0..h {
                z[k] = nn::sigmoid(z[k]);
                z[h + k] = nn::sigmoid(z[h + k]);
                z[2 * h + k] = z[2 * h + k].tanh();
                z[3 * h + k] = nn::sigmoid(z[3 * h + k]);
                c[k] = z[k] * c[k] + z[h + k] * z[2 * h + k];
                hs[k] = z[3 * h + k] * c[k].tanh();
            }
            t.candidate.push(z[2 * h..3 * h].to_vec());
            t.gates.push(z);
            t.cell.push(c.clone());
            t.hidden.push(hs.clone());
        }
        Ok(t)
    }

    fn head(&self, hidden: &[f64]) -> Vec<f64> {
        let l = self.layout();
        nn::linear(
            hidden,
            1,
            self.config.hidden,
            l.head_w.of(&self.params),
            Some(l.head_b.of(&self.params)),
            self.n_classes,
        )
    }
}

fn layout(d: usize, h: usize, k: usize) -> Layout {
    let mut a = Allocator::default();
    let w = a.take(4 * h * (d + h));
    let b = a.take(4 * h);
    let head_w = a.take(k * h);
    let head_b = a.take(k);
    Layout {
        w,
        b,
        head_w,
        head_b,
        size: a.size,
    }
}

impl SequenceNet for Lstm {
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn logits(&self, x: &Matrix) -> Result<Vec<f64>> {
        let t = self.trace(x)?;
        Ok(self.head(t.hidden.last().expect("non-empty sequence")))
    }

    /// Backpropagation through time over the whole window.
    fn loss_grad(&self, x: &Matrix, label: usize, grad: &mut [f64]) -> Result<f64> {
        if label >= self.n_classes {
            return Err(Error::invalid(
                "label",
                alloc::format!("{label} outside 0..{}", self.n_classes),
            ));
        }
        let t = self.trace(x)?;
        let (d, h, n) = (self.input_dim, self.config.hidden, x.rows());
        let l = self.layout();
        let h_last = t.hidden.last().expect("non-empty sequence");
        let logits = self.head(h_last);
        let mut dlogits = alloc::vec![0.0; self.n_classes];
        let loss = nn::cross_entropy(&logits, label, &mut dlogits);

        let (dw_all, rest) = grad.split_at_mut(l.b.offset);
        let (db, rest) = rest.split_at_mut(l.b.len);
        let (dhead_w, dhead_b) = rest.split_at_mut(l.head_w.len);
        let mut dh = nn::linear_backward(
            h_last,
            1,
            h,
            l.head_w.of(&self.params),
            self.n_classes,
            &dlogits,
            dhead_w,
            Some(dhead_b),
        );
        let dw = &mut dw_all[l.w.offset..];
        let w = l.w.of(&self.params);
        let mut dc = alloc::vec![0.0; h];
        let mut u = alloc::vec![0.0; d + h];
        let mut dz = alloc::vec![0.0; 4 * h];
        let zeros = alloc::vec![0.0; h];
        for step in (0..n).rev() {
            let g = &t.gates[step];
            let c = &t.cell[step];
            let c_prev = if step > 0 { &t.cell[step - 1] } else { &zeros };
            for k in 0..h {
                let (f, i, cand, o) = (g[k], g[h + k], g[2 * h + k], g[3 * h + k]);
                let tc = c[k].tanh();
                let d_o = dh[k] * tc;
                dc[k] += dh[k] * o * (1.0 - tc * tc);
                dz[k] = dc[k] * c_prev[k] * f * (1.0 - f);
                dz[h + k] = dc[k] * cand * i * (1.0 - i);
                dz[2 * h + k] = dc[k] * i * (1.0 - cand * cand);
                dz[3 * h + k] = d_o * o * (1.0 - o);
                dc[k] *= f;
            }
            u[..d].copy_from_slice(x.row(step));
            if step > 0 {
                u[d..].copy_from_slice(&t.hidden[step - 1]);
            } else {
                u[d..].fill(0.0);
            }
            let du = nn::linear_backward(&u, 1, d + h, w, 4 * h, &dz, dw, Some(&mut *db));
            dh.copy_from_slice(&du[d..]);
        }
        Ok(loss)
    }
}

#[cfg(test)]
mod tests {
    use super::super::gradcheck::check_gradient;
    use super::*;
    use rand::Rng;

    fn fixture(seed: u64, rows: usize, d: usize) -> Matrix {
        let mut rng = rng::stream(seed, 99, 0);
        Matrix::from_vec(rows, d, (0..rows * d).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn zero_weights_give_head_bias() {
        let mut m = Lstm::new(
            LstmConfig {
                hidden: 4,
                forget_bias: 0.0,
            },
            3,
            3,
            1,
        )
        .unwrap();
        m.params.fill(0.0);
        let l = m.layout();
        l.head_b.of_mut(&mut m.params).copy_from_slice(&[0.5, -1.0, 2.0]);
        let x = fixture(1, 5, 3);
        assert!(m.trace(&x).unwrap().hidden.last().unwrap().iter().all(|&v| v == 0.0));
        assert_eq!(m.logits(&x).unwrap(), [0.5, -1.0, 2.0]);
    }

    #[test]
    fn cell_state_grows_at_most_linearly() {
        let m = Lstm::new(
            LstmConfig {
                hidden: 6,
                forget_bias: 3.0,
            },
            2,
            3,
            4,
        )
        .unwrap();
        let x = Matrix::from_rows(&alloc::vec![[0.7, -0.2]; 30]).unwrap();
        let t = m.trace(&x).unwrap();
        let max_cand = t.candidate.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        for (step, c) in t.cell.iter().enumerate() {
            assert!(c.iter().all(|v| v.abs() <= (step + 1) as f64 * max_cand + 1e-12));
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let m = Lstm::new(
            LstmConfig {
                hidden: 4,
                forget_bias: 1.0,
            },
            3,
            3,
            11,
        )
        .unwrap();
        let x = fixture(2, 3, 3);
        for label in 0..3 {
            let r = check_gradient(&m, &x, label, 1e-5).unwrap();
            assert!(r.max_relative_error < 1e-4, "{r:?}");
        }
    }

    #[test]
    fn rejects_wrong_width() {
        let m = Lstm::new(LstmConfig::default(), 3, 3, 1).unwrap();
        assert!(matches!(m.logits(&fixture(1, 4, 2)), Err(Error::Shape(_))));
    }
}
