//! Algorithms for benchmarking ICU length-of-stay classifiers on
//! neurological cohorts.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no I/O. Companion
//! crates handle files, configuration and the command line; everything here
//! is a pure function of its inputs and seeds.
//!
//! Module map, in pipeline order:
//!
//! * [`synthgen`]: seeded MIMIC-shaped cohorts with planted signal and
//!   ground-truth Bayes class probabilities.
//! * [`marts`]: ICD filtering, LOS binning, the static admissions mart and
//!   the event / minute-grid chartevents marts.
//! * [`features`]: encoding, scaling, stratified splits, SMOTE and
//!   recursive feature elimination.
//! * [`classic`]: KNN, decision trees, random forests, second-order
//!   gradient boosting and a linear SVM.
//! * [`seq`]: series filling, sliding windows, LSTM and transformer-encoder
//!   classifiers with hand-written gradients.
//! * [`eval`]: metrics, cross-validation, permutation importance and random
//!   search with successive halving.

#![no_std]
#![forbid(unsafe_code)]
// Float methods come from `num-traits` in no_std builds and from std whenever
// std is linked into the build (tests, or a std dependent).
#![allow(unused_imports)]
// `!(x > 0.0)` is used on purpose: it rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod classic;
pub mod error;
pub mod eval;
pub mod exec;
pub mod features;
pub mod los;
pub mod marts;
pub mod matrix;
pub mod rng;
pub mod seq;
pub mod synthgen;
pub mod tables;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use los::{bin_los, BinEdges, LosClass};
pub use matrix::Matrix;
