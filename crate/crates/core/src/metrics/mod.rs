//! Selection metrics, Monte-Carlo experiments, timing and cross-validation.
//!
//! Replicates run on the current rayon pool. Each replicate draws from its
//! own pre-split stream, and aggregation walks the results in replicate
//! order, so every number is independent of the thread count.

mod cv;
mod dominance;
mod experiment;
mod selection;
mod stats;
mod timing;

pub use cv::{kfold_cv, kfold_cv_with_folds, CvReport};
pub use dominance::{dominance_ratio, holp_projection, marginal_projection};
pub use experiment::{
    aggregate, inclusion_probability, run_experiment, run_replicates, separation_probability, separates, ExperimentReport,
    ReplicateOutcome,
};
pub use selection::{score_selection, SelectionMetrics};
pub use stats::{mc_band, median, two_pass_sd, RunningStats, Summary};
pub use timing::{timing_run, TimingPoint};
