//! Sequence models of remaining length of stay: filling of sparse chart
//! series, sliding windows, and LSTM / transformer-encoder classifiers with
//! hand-written backpropagation.

mod encoder;
mod fill;
mod gradcheck;
mod lstm;
mod nn;
mod optim;
mod train;
mod windows;

pub use encoder::{positional_encoding, Encoder, EncoderConfig};
pub use fill::{channel_medians, channel_names, fill_series, FilledSeries};
pub use gradcheck::{check_gradient, GradCheck, RELATIVE_FLOOR};
pub use lstm::{Lstm, LstmConfig, LstmTrace};
pub use optim::{Optimizer, OptimizerKind};
pub use train::{evaluate, train_sequence_model, EpochRecord, SeqArch, SeqModel, TrainConfig, TrainOutcome};
pub use windows::{build_windows, make_windows, window_count, ChannelScaler, WindowReport, WindowSample};

use alloc::vec::Vec;

use crate::classic::argmax;
use crate::error::Result;
use crate::matrix::Matrix;

/// A differentiable classifier over `window x channels` inputs with a flat
/// parameter vector.
pub trait SequenceNet: Send + Sync {
    fn input_dim(&self) -> usize;

    fn n_classes(&self) -> usize;

    fn params(&self) -> &[f64];

    fn params_mut(&mut self) -> &mut [f64];

    fn logits(&self, x: &Matrix) -> Result<Vec<f64>>;

    /// Softmax cross-entropy of one sample; adds the parameter gradient into `grad`.
    fn loss_grad(&self, x: &Matrix, label: usize, grad: &mut [f64]) -> Result<f64>;

    fn probabilities(&self, x: &Matrix) -> Result<Vec<f64>> {
        let mut p = self.logits(x)?;
        nn::softmax(&mut p);
        Ok(p)
    }

    fn predict(&self, x: &Matrix) -> Result<usize> {
        Ok(argmax(&self.logits(x)?))
    }
}
