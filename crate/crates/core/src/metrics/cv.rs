use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::stats::{median, RunningStats};
use crate::error::{Error, Result, Warning};
use crate::matrix::DataMatrix;
use crate::modelselect::{ols_refit, run_pipeline, PipelineSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub mean_mse: f64,
    pub sd_mse: f64,
    pub median_size: f64,
    /// Held-out MSE per fold; `None` for skipped folds.
    pub fold_mse: Vec<Option<f64>>,
    pub warnings: Vec<Warning>,
}

/// Seeded k-fold cross-validation of a whole pipeline.
///
/// Rows are shuffled with ChaCha8 seeded by `seed`; the i-th shuffled row
/// goes to fold `i % k`.
pub fn kfold_cv(x: &DataMatrix, y: &[f64], spec: &PipelineSpec, k: usize, seed: u64) -> Result<CvReport> {
    let n = x.rows();
    if k < 2 || n < 2 * k {
        return Err(Error::invalid("folds", format!("need 2 <= k <= n/2, got k = {k} with n = {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![0; n];
    for (i, &row) in order.iter().enumerate() {
        folds[row] = i % k;
    }
    kfold_cv_with_folds(x, y, spec, &folds, seed)
}

/// Cross-validation over an explicit fold label per row.
///
/// Each fold trains the pipeline on the other rows, refits OLS on the
/// selected columns and scores the held-out rows. A fold whose pipeline or
/// refit fails is skipped with a warning.
pub fn kfold_cv_with_folds(
    x: &DataMatrix,
    y: &[f64],
    spec: &PipelineSpec,
    folds: &[usize],
    seed: u64,
) -> Result<CvReport> {
    let n = x.rows();
    if folds.len() != n || y.len() != n {
        return Err(Error::invalid("folds", "need one fold label and one response per row"));
    }
    let k = folds.iter().max().map_or(0, |m| m + 1);
    let mut fold_mse = Vec::with_capacity(k);
    let mut sizes = Vec::new();
    let mut warnings = Vec::new();
    for fold in 0..k {
        let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| folds[i] == fold);
        if test.is_empty() {
            fold_mse.push(None);
            continue;
        }
        let xt = x.select_rows(&train);
        let yt: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let outcome = run_pipeline(&xt, &yt, spec, seed).and_then(|out| ols_refit(&xt, &yt, &out.fit.support));
        match outcome {
            Ok(fit) => {
                let mse = test
                    .iter()
                    .map(|&i| {
                        let e = y[i] - fit.predict_row(x.row(i));
                        e * e
                    })
                    .sum::<f64>()
                    / test.len() as f64;
                sizes.push(fit.support.len() as f64);
                fold_mse.push(Some(mse));
            }
            Err(e) => {
                warn!("fold {fold} skipped: {e}");
                warnings.push(Warning::SkippedFold {
                    fold,
                    reason: e.to_string(),
                });
                fold_mse.push(None);
            }
        }
    }
    let stats: RunningStats = fold_mse.iter().flatten().copied().collect();
    if stats.count() == 0 {
        return Err(Error::invalid("folds", "every fold was skipped"));
    }
    Ok(CvReport {
        mean_mse: stats.mean(),
        sd_mse: stats.sd(),
        median_size: median(&sizes).expect("at least one fold"),
        fold_mse,
        warnings,
    })
}
