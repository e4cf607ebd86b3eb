use alloc::string::ToString;
use alloc::vec::Vec;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::encoder::{Encoder, EncoderConfig};
use super::lstm::{Lstm, LstmConfig};
use super::optim::{Optimizer, OptimizerKind};
use super::windows::WindowSample;
use super::{nn, SequenceNet};
use crate::classic::argmax;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::matrix::Matrix;
use crate::rng::{self, domain};

/// Samples per gradient work unit. Fixed, so summation order does not
/// depend on the executor.
const GRAD_CHUNK: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeqArch {
    Lstm(LstmConfig),
    Encoder(EncoderConfig),
}

impl SeqArch {
    pub fn name(&self) -> &'static str {
        match self {
            SeqArch::Lstm(_) => "lstm",
            SeqArch::Encoder(_) => "encoder",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SeqArch::Lstm(c) => c.validate(),
            SeqArch::Encoder(c) => c.validate(),
        }
    }

    pub fn build(&self, input_dim: usize, n_classes: usize, seed: u64) -> Result<SeqModel> {
        Ok(match self {
            SeqArch::Lstm(c) => SeqModel::Lstm(Lstm::new(*c, input_dim, n_classes, seed)?),
            SeqArch::Encoder(c) => SeqModel::Encoder(Encoder::new(*c, input_dim, n_classes, seed)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeqModel {
    Lstm(Lstm),
    Encoder(Encoder),
}

impl SeqModel {
    fn inner(&self) -> &dyn SequenceNet {
        match self {
            SeqModel::Lstm(m) => m,
            SeqModel::Encoder(m) => m,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SeqModel::Lstm(_) => "lstm",
            SeqModel::Encoder(_) => "encoder",
        }
    }
}

impl SequenceNet for SeqModel {
    fn input_dim(&self) -> usize {
        self.inner().input_dim()
    }

    fn n_classes(&self) -> usize {
        self.inner().n_classes()
    }

    fn params(&self) -> &[f64] {
        self.inner().params()
    }

    fn params_mut(&mut self) -> &mut [f64] {
        match self {
            SeqModel::Lstm(m) => m.params_mut(),
            SeqModel::Encoder(m) => m.params_mut(),
        }
    }

    fn logits(&self, x: &Matrix) -> Result<Vec<f64>> {
        self.inner().logits(x)
    }

    fn loss_grad(&self, x: &Matrix, label: usize, grad: &mut [f64]) -> Result<f64> {
        self.inner().loss_grad(x, label, grad)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    /// Stop after this many epochs without a lower validation loss.
    pub patience: Option<usize>,
    /// Rescale each batch gradient to at most this Euclidean norm.
    pub clip_norm: Option<f64>,
    /// Train on a seeded subset of at most this many windows.
    pub max_train_windows: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 20,
            batch_size: 32,
            learning_rate: 1e-4,
            optimizer: OptimizerKind::Adam,
            seed: 42,
            patience: None,
            clip_norm: Some(5.0),
            max_train_windows: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::invalid("epochs", "must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size", "must be at least 1"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning_rate", "must be finite and non-negative"));
        }
        if self.clip_norm.is_some_and(|c| !(c > 0.0)) {
            return Err(Error::invalid("clip_norm", "must be positive"));
        }
        if self.max_train_windows == Some(0) {
            return Err(Error::invalid("max_train_windows", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
    pub val_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    /// Parameters of the epoch with the lowest validation loss, or of the last epoch without validation data.
    pub model: SeqModel,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

/// Mean cross-entropy and accuracy over `samples`.
pub fn evaluate<N: SequenceNet + ?Sized, E: Executor>(
    net: &N,
    samples: &[WindowSample],
    exec: &E,
) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::Empty("evaluation windows"));
    }
    let out = exec.map(samples.len(), |i| -> Result<(f64, bool)> {
        let s = &samples[i];
        let logits = net.logits(&s.x)?;
        let mut d = alloc::vec![0.0; logits.len()];
        Ok((nn::cross_entropy(&logits, s.label, &mut d), argmax(&logits) == s.label))
    });
    let mut loss = 0.0;
    let mut hits = 0usize;
    for r in out {
        let (l, ok) = r?;
        loss += l;
        hits += usize::from(ok);
    }
    let n = samples.len() as f64;
    Ok((loss / n, hits as f64 / n))
}

fn check_samples(samples: &[WindowSample], width: usize, n_classes: usize) -> Result<()> {
    for s in samples {
        if s.x.cols() != width {
            return Err(Error::Shape(alloc::format!(
                "window with {} channels, expected {width}",
                s.x.cols()
            )));
        }
        if s.label >= n_classes {
            return Err(Error::invalid(
                "label",
                alloc::format!("{} outside 0..{n_classes}", s.label),
            ));
        }
    }
    Ok(())
}

/// Minibatch training with softmax cross-entropy. Batch order comes from
/// the seed; per-sample gradients run on `exec` and are summed in a fixed
/// order, so results do not depend on the thread count.
pub fn train_sequence_model<E: Executor>(
    arch: &SeqArch,
    train: &[WindowSample],
    val: &[WindowSample],
    n_classes: usize,
    cfg: &TrainConfig,
    exec: &E,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    arch.validate()?;
    let first = train.first().ok_or(Error::Empty("training windows"))?;
    let width = first.x.cols();
    check_samples(train, width, n_classes)?;
    check_samples(val, width, n_classes)?;
    let mut model = arch.build(width, n_classes, cfg.seed)?;

    let mut chosen: Vec<usize> = (0..train.len()).collect();
    if let Some(cap) = cfg.max_train_windows.filter(|&c| c < train.len()) {
        chosen =
            rng::sample_without_replacement(&mut rng::stream(cfg.seed, domain::BATCHES, u64::MAX), train.len(), cap);
        chosen.sort_unstable();
    }

    let n_params = model.params().len();
    let mut opt = Optimizer::new(cfg.optimizer, n_params);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    let mut stopped_early = false;
    for epoch in 1..=cfg.epochs {
        let mut order = chosen.clone();
        rng::shuffle(&mut rng::stream(cfg.seed, domain::BATCHES, epoch as u64), &mut order);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let n_chunks = batch.len().div_ceil(GRAD_CHUNK);
            let parts = exec.map(n_chunks, |c| -> Result<(f64, Vec<f64>)> {
                let mut g = alloc::vec![0.0; n_params];
                let mut loss = 0.0;
                for &i in &batch[c * GRAD_CHUNK..((c + 1) * GRAD_CHUNK).min(batch.len())] {
                    loss += model.loss_grad(&train[i].x, train[i].label, &mut g)?;
                }
                Ok((loss, g))
            });
            let mut grad = alloc::vec![0.0; n_params];
            let mut loss = 0.0;
            for part in parts {
                let (l, g) = part?;
                loss += l;
                grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
            }
            let scale = 1.0 / batch.len() as f64;
            grad.iter_mut().for_each(|g| *g *= scale);
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if !loss.is_finite() || !norm.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    detail: alloc::format!("batch loss {loss}, gradient norm {norm}"),
                });
            }
            if let Some(c) = cfg.clip_norm.filter(|&c| norm > c) {
                grad.iter_mut().for_each(|g| *g *= c / norm);
            }
            opt.step(model.params_mut(), &grad, cfg.learning_rate);
            epoch_loss += loss;
        }
        let train_loss = epoch_loss / chosen.len() as f64;
        let (val_loss, val_accuracy) = if val.is_empty() {
            (None, None)
        } else {
            let (l, a) = evaluate(&model, val, exec)?;
            if !l.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    detail: l.to_string() + " validation loss",
                });
            }
            (Some(l), Some(a))
        };
        history.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            val_accuracy,
        });
        if let Some(l) = val_loss {
            if best.as_ref().is_none_or(|b| l < b.0) {
                best = Some((l, epoch, model.params().to_vec()));
            } else if cfg
                .patience
                .is_some_and(|p| epoch - best.as_ref().map_or(0, |b| b.1) >= p)
            {
                stopped_early = true;
                break;
            }
        }
    }
    let best_epoch = match best {
        Some((_, e, params)) => {
            model.params_mut().copy_from_slice(&params);
            e
        }
        None => history.len(),
    };
    Ok(TrainOutcome {
        model,
        history,
        best_epoch,
        stopped_early,
    })
}
