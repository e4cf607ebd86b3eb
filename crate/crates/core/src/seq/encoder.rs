//! Transformer-encoder classifier: input projection, optional sinusoidal
//! positional encoding, post-norm blocks of multi-head self-attention and a
//! ReLU feed-forward network, mean pooling over time and a linear head.
//!
//! Attention per head is `softmax(Q K^T / sqrt(d_k)) V`; the heads are
//! concatenated and mixed by `W^O`.

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
pub struct EncoderConfig {
    pub d_model: usize,
    pub n_heads: usize,
    pub n_blocks: usize,
    pub ffn_dim: usize,
    pub positional: bool,
    /// Longest window the positional table covers.
    pub max_len: usize,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            d_model: 64,
            n_heads: 16,
            n_blocks: 4,
            ffn_dim: 128,
            positional: true,
            max_len: 4096,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d_model == 0 || self.n_heads == 0 || self.ffn_dim == 0 || self.n_blocks == 0 {
            return Err(Error::invalid(
                "encoder",
                "d_model, n_heads, n_blocks and ffn_dim must be positive",
            ));
        }
        if self.d_model % self.n_heads != 0 {
            return Err(Error::invalid(
                "n_heads",
                alloc::format!("d_model {} is not divisible by {} heads", self.d_model, self.n_heads),
            ));
        }
        if self.max_len == 0 {
            return Err(Error::invalid("max_len", "must be positive"));
        }
        Ok(())
    }

    pub fn d_k(&self) -> usize {
        self.d_model / self.n_heads
    }
}

/// Sinusoidal encoding of position `pos`, dimension `i`.
pub fn positional_encoding(pos: usize, i: usize, d_model: usize) -> f64 {
    let angle = pos as f64 / 10_000f64.powf((2 * (i / 2)) as f64 / d_model as f64);
    if i % 2 == 0 {
        angle.sin()
    } else {
        angle.cos()
    }
}

#[derive(Debug, Clone, Copy)]
struct BlockLayout {
    wq: Block,
    wk: Block,
    wv: Block,
    wo: Block,
    /// Gain then bias.
    ln1: Block,
    w1: Block,
    b1: Block,
    w2: Block,
    b2: Block,
    ln2: Block,
}

#[derive(Debug, Clone)]
struct Layout {
    in_w: Block,
    in_b: Block,
    blocks: Vec<BlockLayout>,
    head_w: Block,
    head_b: Block,
    size: usize,
}

fn layout(c: &EncoderConfig, input_dim: usize, n_classes: usize) -> Layout {
    let (dm, f) = (c.d_model, c.ffn_dim);
    let mut a = Allocator::default();
    let in_w = a.take(dm * input_dim);
    let in_b = a.take(dm);
    let blocks = (0..c.n_blocks)
        .map(|_| BlockLayout {
            wq: a.take(dm * dm),
            wk: a.take(dm * dm),
            wv: a.take(dm * dm),
            wo: a.take(dm * dm),
            ln1: a.take(2 * dm),
            w1: a.take(f * dm),
            b1: a.take(f),
            w2: a.take(dm * f),
            b2: a.take(dm),
            ln2: a.take(2 * dm),
        })
        .collect();
    let head_w = a.take(n_classes * dm);
    let head_b = a.take(n_classes);
    Layout {
        in_w,
        in_b,
        blocks,
        head_w,
        head_b,
        size: a.size,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    pub config: EncoderConfig,
    pub input_dim: usize,
    pub n_classes: usize,
    pub params: Vec<f64>,
}

/// Intermediate values of one block, kept for the backward pass.
struct BlockCache {
    input: Vec<f64>,
    q: Vec<f64>,
    k: Vec<f64>,
    v: Vec<f64>,
    /// `[head][i][j]`, rows sum to 1.
    attn: Vec<f64>,
    concat: Vec<f64>,
    xhat1: Vec<f64>,
    inv1: Vec<f64>,
    y1: Vec<f64>,
    pre: Vec<f64>,
    act: Vec<f64>,
    xhat2: Vec<f64>,
    inv2: Vec<f64>,
}

struct Forward {
    blocks: Vec<BlockCache>,
    pooled: Vec<f64>,
    logits: Vec<f64>,
}

fn add_colsum(dout: &[f64], m: usize, acc: &mut [f64]) {
    for row in dout.chunks(m) {
        for (a, g) in acc.iter_mut().zip(row) {
            *a += g;
        }
    }
}

impl Encoder {
    pub fn new(config: EncoderConfig, input_dim: usize, n_classes: usize, seed: u64) -> Result<Encoder> {
        config.validate()?;
        if input_dim == 0 || n_classes == 0 {
            return Err(Error::invalid("input_dim", "input and class counts must be positive"));
        }
        let l = layout(&config, input_dim, n_classes);
        let (dm, f) = (config.d_model, config.ffn_dim);
        let mut p = alloc::vec![0.0; l.size];
        let mut rng = rng::stream(seed, domain::INIT, 0);
        nn::xavier(&mut rng, l.in_w.of_mut(&mut p), input_dim, dm);
        for b in &l.blocks {
            for w in [b.wq, b.wk, b.wv, b.wo] {
                nn::xavier(&mut rng, w.of_mut(&mut p), dm, dm);
            }
            nn::xavier(&mut rng, b.w1.of_mut(&mut p), dm, f);
            nn::xavier(&mut rng, b.w2.of_mut(&mut p), f, dm);
            b.ln1.of_mut(&mut p)[..dm].fill(1.0);
            b.ln2.of_mut(&mut p)[..dm].fill(1.0);
        }
        nn::xavier(&mut rng, l.head_w.of_mut(&mut p), dm, n_classes);
        Ok(Encoder {
            config,
            input_dim,
            n_classes,
            params: p,
        })
    }

    fn check(&self, x: &Matrix, l: &Layout) -> Result<()> {
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
        if x.rows() > self.config.max_len {
            return Err(Error::invalid(
                "window",
                alloc::format!(
                    "{} rows exceed the positional table of {}",
                    x.rows(),
                    self.config.max_len
                ),
            ));
        }
        if self.params.len() != l.size {
            return Err(Error::Shape(alloc::format!(
                "{} parameters, layout needs {}",
                self.params.len(),
                l.size
            )));
        }
        Ok(())
    }

    fn forward(&self, x: &Matrix) -> Result<Forward> {
        let l = layout(&self.config, self.input_dim, self.n_classes);
        self.check(x, &l)?;
        let p = &self.params;
        let c = &self.config;
        let (n, dm, f, nh, dk) = (x.rows(), c.d_model, c.ffn_dim, c.n_heads, c.d_k());
        let scale = 1.0 / (dk as f64).sqrt();
        let mut e = nn::linear(x.as_slice(), n, self.input_dim, l.in_w.of(p), Some(l.in_b.of(p)), dm);
        if c.positional {
            for t in 0..n {
                for i in 0..dm {
                    e[t * dm + i] += positional_encoding(t, i, dm);
                }
            }
        }
        let mut caches = Vec::with_capacity(l.blocks.len());
        for b in &l.blocks {
            let q = nn::linear(&e, n, dm, b.wq.of(p), None, dm);
            let k = nn::linear(&e, n, dm, b.wk.of(p), None, dm);
            let v = nn::linear(&e, n, dm, b.wv.of(p), None, dm);
            let mut attn = alloc::vec![0.0; nh * n * n];
            let mut concat = alloc::vec![0.0; n * dm];
            for h in 0..nh {
                let a = &mut attn[h * n * n..(h + 1) * n * n];
                for i in 0..n {
                    let row = &mut a[i * n..(i + 1) * n];
                    for j in 0..n {
                        let hs = h * dk..(h + 1) * dk;
                        row[j] = nn::dot(&q[i * dm..][hs.clone()], &k[j * dm..][hs]) * scale;
                    }
                    nn::softmax(row);
                    for j in 0..n {
                        let w = row[j];
                        for d in h * dk..(h + 1) * dk {
                            concat[i * dm + d] += w * v[j * dm + d];
                        }
                    }
                }
            }
            let mixed = nn::linear(&concat, n, dm, b.wo.of(p), None, dm);
            let r1: Vec<f64> = e.iter().zip(&mixed).map(|(a, m)| a + m).collect();
            let ln1 = b.ln1.of(p);
            let (y1, xhat1, inv1) = nn::layer_norm(&r1, n, dm, &ln1[..dm], &ln1[dm..]);
            let pre = nn::linear(&y1, n, dm, b.w1.of(p), Some(b.b1.of(p)), f);
            let act: Vec<f64> = pre.iter().map(|&z| z.max(0.0)).collect();
            let ffn = nn::linear(&act, n, f, b.w2.of(p), Some(b.b2.of(p)), dm);
            let r2: Vec<f64> = y1.iter().zip(&ffn).map(|(a, m)| a + m).collect();
            let ln2 = b.ln2.of(p);
            let (out, xhat2, inv2) = nn::layer_norm(&r2, n, dm, &ln2[..dm], &ln2[dm..]);
            caches.push(BlockCache {
                input: core::mem::replace(&mut e, out),
                q,
                k,
                v,
                attn,
                concat,
                xhat1,
                inv1,
                y1,
                pre,
                act,
                xhat2,
                inv2,
            });
        }
        let mut pooled = alloc::vec![0.0; dm];
        for row in e.chunks(dm) {
            for (acc, v) in pooled.iter_mut().zip(row) {
                *acc += v / n as f64;
            }
        }
        let logits = nn::linear(&pooled, 1, dm, l.head_w.of(p), Some(l.head_b.of(p)), self.n_classes);
        Ok(Forward {
            blocks: caches,
            pooled,
            logits,
        })
    }

    /// Attention weights `[block][head]`, each `window x window`.
    pub fn attention(&self, x: &Matrix) -> Result<Vec<Vec<Matrix>>> {
        let fw = self.forward(x)?;
        let (n, nh) = (x.rows(), self.config.n_heads);
        fw.blocks
            .iter()
            .map(|b| {
                (0..nh)
                    .map(|h| Matrix::from_vec(n, n, b.attn[h * n * n..(h + 1) * n * n].to_vec()))
                    .collect()
            })
            .collect()
    }
}

impl SequenceNet for Encoder {
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
        Ok(self.forward(x)?.logits)
    }

    fn loss_grad(&self, x: &Matrix, label: usize, grad: &mut [f64]) -> Result<f64> {
        if label >= self.n_classes {
            return Err(Error::invalid(
                "label",
                alloc::format!("{label} outside 0..{}", self.n_classes),
            ));
        }
        let fw = self.forward(x)?;
        let l = layout(&self.config, self.input_dim, self.n_classes);
        let p = &self.params;
        let c = &self.config;
        let (n, dm, f, nh, dk) = (x.rows(), c.d_model, c.ffn_dim, c.n_heads, c.d_k());
        let scale = 1.0 / (dk as f64).sqrt();
        let mut dlogits = alloc::vec![0.0; self.n_classes];
        let loss = nn::cross_entropy(&fw.logits, label, &mut dlogits);

        let dpooled = nn::linear_backward(
            &fw.pooled,
            1,
            dm,
            l.head_w.of(p),
            self.n_classes,
            &dlogits,
            l.head_w.of_mut(grad),
            None,
        );
        add_colsum(&dlogits, self.n_classes, l.head_b.of_mut(grad));
        let mut de: Vec<f64> = (0..n * dm).map(|i| dpooled[i % dm] / n as f64).collect();

        for (b, cache) in l.blocks.iter().zip(&fw.blocks).rev() {
            let ln2 = b.ln2.of(p);
            let (dg2, db2) = b.ln2.of_mut(grad).split_at_mut(dm);
            let dr2 = nn::layer_norm_backward(&de, &cache.xhat2, &cache.inv2, n, dm, &ln2[..dm], dg2, db2);
            let mut dy1 = dr2.clone();
            let dact = nn::linear_backward(&cache.act, n, f, b.w2.of(p), dm, &dr2, b.w2.of_mut(grad), None);
            add_colsum(&dr2, dm, b.b2.of_mut(grad));
            let dpre: Vec<f64> = dact
                .iter()
                .zip(&cache.pre)
                .map(|(g, &z)| if z > 0.0 { *g } else { 0.0 })
                .collect();
            let dy1_ffn = nn::linear_backward(&cache.y1, n, dm, b.w1.of(p), f, &dpre, b.w1.of_mut(grad), None);
            add_colsum(&dpre, f, b.b1.of_mut(grad));
            dy1.iter_mut().zip(&dy1_ffn).for_each(|(a, g)| *a += g);

            let ln1 = b.ln1.of(p);
            let (dg1, db1) = b.ln1.of_mut(grad).split_at_mut(dm);
            let dr1 = nn::layer_norm_backward(&dy1, &cache.xhat1, &cache.inv1, n, dm, &ln1[..dm], dg1, db1);
            let dconcat = nn::linear_backward(&cache.concat, n, dm, b.wo.of(p), dm, &dr1, b.wo.of_mut(grad), None);

            let mut dq = alloc::vec![0.0; n * dm];
            let mut dk_ = alloc::vec![0.0; n * dm];
            let mut dv = alloc::vec![0.0; n * dm];
            let mut da = alloc::vec![0.0; n];
            for h in 0..nh {
                let a = &cache.attn[h * n * n..(h + 1) * n * n];
                let cols = h * dk..(h + 1) * dk;
                for i in 0..n {
                    let arow = &a[i * n..(i + 1) * n];
                    let mut dot = 0.0;
                    for j in 0..n {
                        let mut s = 0.0;
                        for d in cols.clone() {
                            s += dconcat[i * dm + d] * cache.v[j * dm + d];
                            dv[j * dm + d] += arow[j] * dconcat[i * dm + d];
                        }
                        da[j] = s;
                        dot += s * arow[j];
                    }
                    for j in 0..n {
                        let ds = arow[j] * (da[j] - dot) * scale;
                        if ds == 0.0 {
                            continue;
                        }
                        for d in cols.clone() {
                            dq[i * dm + d] += ds * cache.k[j * dm + d];
                            dk_[j * dm + d] += ds * cache.q[i * dm + d];
                        }
                    }
                }
            }
            let mut dinput = dr1;
            for (w, dw_block, dout) in [(b.wq, b.wq, &dq), (b.wk, b.wk, &dk_), (b.wv, b.wv, &dv)] {
                let d = nn::linear_backward(&cache.input, n, dm, w.of(p), dm, dout, dw_block.of_mut(grad), None);
                dinput.iter_mut().zip(&d).for_each(|(a, g)| *a += g);
            }
            de = dinput;
        }
        nn::linear_backward(
            x.as_slice(),
            n,
            self.input_dim,
            l.in_w.of(p),
            dm,
            &de,
            l.in_w.of_mut(grad),
            None,
        );
        add_colsum(&de, dm, l.in_b.of_mut(grad));
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

    fn small(positional: bool) -> EncoderConfig {
        EncoderConfig {
            d_model: 8,
            n_heads: 2,
            n_blocks: 1,
            ffn_dim: 16,
            positional,
            max_len: 64,
        }
    }

    #[test]
    fn attention_rows_sum_to_one() {
        let m = Encoder::new(
            EncoderConfig {
                n_blocks: 2,
                ..small(true)
            },
            3,
            3,
            5,
        )
        .unwrap();
        for block in m.attention(&fixture(1, 7, 3)).unwrap() {
            for head in block {
                for row in head.iter_rows() {
                    assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn permutation_invariant_without_positions() {
        let m = Encoder::new(small(false), 3, 3, 6).unwrap();
        let x = fixture(2, 6, 3);
        let perm = [3, 0, 5, 1, 4, 2];
        let a = m.logits(&x).unwrap();
        let b = m.logits(&x.select_rows(&perm)).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-9);
        }
        let with_pe = Encoder::new(small(true), 3, 3, 6).unwrap();
        assert_ne!(
            with_pe.logits(&x).unwrap(),
            with_pe.logits(&x.select_rows(&perm)).unwrap()
        );
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for positional in [false, true] {
            let m = Encoder::new(small(positional), 3, 3, 7).unwrap();
            let x = fixture(3, 5, 3);
            for label in 0..3 {
                let r = check_gradient(&m, &x, label, 1e-5).unwrap();
                assert!(r.max_relative_error < 1e-4, "{r:?}");
            }
        }
    }

    #[test]
    fn config_errors() {
        assert!(Encoder::new(
            EncoderConfig {
                n_heads: 3,
                ..small(true)
            },
            3,
            3,
            1
        )
        .is_err());
        let m = Encoder::new(
            EncoderConfig {
                max_len: 4,
                ..small(true)
            },
            3,
            3,
            1,
        )
        .unwrap();
        assert!(m.logits(&fixture(1, 5, 3)).is_err());
    }

    #[test]
    fn positional_table_closed_form() {
        assert_eq!(positional_encoding(0, 0, 8), 0.0);
        assert_eq!(positional_encoding(0, 1, 8), 1.0);
        assert!((positional_encoding(3, 2, 8) - (3.0 / 10f64.powf(1.0)).sin()).abs() < 1e-15);
    }
}
