//! Evaluation: multiclass metrics, cross-validation, permutation importance
//! and seeded random search with successive halving.

mod cv;
mod metrics;
mod permutation;
mod search;

pub use cv::{cross_validate, CvResult, FoldScore};
pub use metrics::{compute_metrics, Averages, ClassMetrics, ConfusionMatrix, Metric, MetricsReport};
pub use permutation::{permutation_importance, sequence_permutation_importance, Importance};
pub use search::{default_space, random_search, Domain, Halving, SearchResult, SearchSpace, Trial, TrialStatus};
