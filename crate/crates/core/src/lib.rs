//! Variable screening for ultra-high-dimensional linear regression.
//!
//! The centre of the crate is the high-dimensional ordinary least-squares
//! projection `X^T (X X^T)^{-1} Y` ([`screeners::holp_scores`]) and its
//! ridge and divide-and-combine variants, alongside the usual competitors
//! (SIS, rank-correlation screening, forward regression). Around it sit the
//! pieces needed to benchmark screeners the way the literature does:
//!
//! * [`matrix`], [`cholesky`], [`svd`]: dense kernels.
//! * [`screeners`]: score vectors and top-`d` / threshold selection.
//! * [`modelselect`]: Lasso path, OLS refits, extended BIC, two-stage pipelines.
//! * [`simgen`]: seeded simulation designs with noise calibrated to a target R^2.
//! * [`metrics`]: selection metrics, Monte-Carlo experiments, timing, k-fold CV.

pub mod cholesky;
pub mod error;
pub mod matrix;
pub mod metrics;
pub mod modelselect;
pub mod screeners;
pub mod simgen;
pub mod svd;

pub use cholesky::{spd_factor, spd_solve, SpdFactor};
pub use error::{Error, Result, Warning};
pub use matrix::{gram_rows, mat_mul, DataMatrix, Transpose};
pub use metrics::{
    inclusion_probability, kfold_cv, run_experiment, score_selection, separation_probability, timing_run,
    ExperimentReport, SelectionMetrics,
};
pub use modelselect::{
    ebic, ebic_size, lasso_path, ols_refit, run_pipeline, FitResult, PipelineFit, PipelineSpec, Refiner,
    SubmodelRule,
};
pub use screeners::{
    rank_select, run_screener, threshold_select, ScreenMethod, Screened, Screener, ScreeningScores,
    SelectionRule, SubmodelSelection,
};
pub use simgen::{simulate_dataset, simulate_replicate, Family, SimDataset, SimScenario};
pub use svd::{svd_small, Svd};
