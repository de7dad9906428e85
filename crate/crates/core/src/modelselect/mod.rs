//! Second-stage refinement of a screened submodel.
//!
//! A two-stage procedure screens down to a submodel (top `d`, or a size
//! chosen by extended BIC), then fits a Lasso path on the survivors and
//! keeps the path point with the smallest EBIC, or refits OLS directly.

mod ebic;
mod lasso;
mod ols;
mod pipeline;

use serde::{Deserialize, Serialize};

pub use ebic::ebic;
pub use lasso::{lambda_grid, lambda_max, lasso_path, lasso_path_with, LassoOptions};
pub use ols::ols_refit;
pub use pipeline::{ebic_size, run_pipeline, EbicSizing, PipelineFit, Refiner, SubmodelRule, PipelineSpec};

/// A fitted linear model with intercept.
///
/// `support` indexes the columns of the design the fit was computed on;
/// `coefficients` is aligned with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub support: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub rss: f64,
    /// Penalty level; 0 for least squares.
    pub lambda: f64,
}

impl FitResult {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept
            + self
                .support
                .iter()
                .zip(&self.coefficients)
                .map(|(&j, &b)| b * row[j])
                .sum::<f64>()
    }

    /// Coefficients scattered into a dense vector of length `p`.
    pub fn dense_coefficients(&self, p: usize) -> Vec<f64> {
        let mut out = vec![0.0; p];
        for (&j, &b) in self.support.iter().zip(&self.coefficients) {
            out[j] = b;
        }
        out
    }

    /// Re-indexes `support` through `map` (submodel column -> original column).
    pub(crate) fn remap(mut self, map: &[usize]) -> Self {
        for j in self.support.iter_mut() {
            *j = map[*j];
        }
        self
    }
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub(crate) fn total_ss(y: &[f64]) -> f64 {
    let m = mean(y);
    y.iter().map(|v| (v - m) * (v - m)).sum()
}
