use log::warn;

use super::{check_response, ScreenMethod, ScreenParams, ScreeningScores};
use crate::error::{Result, Warning};
use crate::matrix::DataMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SisOptions {
    /// Standardize columns of `X` and the response first. Off gives the
    /// raw `|X^T Y|`.
    pub standardize: bool,
}

impl Default for SisOptions {
    fn default() -> Self {
        Self { standardize: true }
    }
}

/// Marginal screening `|X^T Y|` on standardized columns and response.
pub fn sis_scores(x: &DataMatrix, y: &[f64]) -> Result<ScreeningScores> {
    sis_scores_with(x, y, &SisOptions::default())
}

pub fn sis_scores_with(x: &DataMatrix, y: &[f64], opts: &SisOptions) -> Result<ScreeningScores> {
    check_response(x, y)?;
    let (n, p) = x.shape();
    if !opts.standardize {
        let scores = x.tr_mul_vec(y)?.into_iter().map(f64::abs).collect();
        return Ok(ScreeningScores::new(scores, ScreenMethod::Sis, ScreenParams::default()));
    }

    let nf = n as f64;
    let ybar = y.iter().sum::<f64>() / nf;
    let mut yc: Vec<f64> = y.iter().map(|v| v - ybar).collect();
    let ysd = (yc.iter().map(|v| v * v).sum::<f64>() / (nf - 1.0).max(1.0)).sqrt();
    if ysd > 0.0 {
        yc.iter_mut().for_each(|v| *v /= ysd);
    }

    // One pass for sums, sums of squares and cross products with the
    // centered response; sum_i x_ij yc_i is already the centered product.
    let mut sum = vec![0.0; p];
    let mut cross = vec![0.0; p];
    for i in 0..n {
        let row = x.row(i);
        let w = yc[i];
        for j in 0..p {
            sum[j] += row[j];
            cross[j] += row[j] * w;
        }
    }
    let mut ss = vec![0.0; p];
    for i in 0..n {
        for ((s, &v), &t) in ss.iter_mut().zip(x.row(i)).zip(&sum) {
            let c = v - t / nf;
            *s += c * c;
        }
    }

    let mut warnings = Vec::new();
    let scores = (0..p)
        .map(|j| {
            let sd = (ss[j] / (nf - 1.0).max(1.0)).sqrt();
            let scale = sum[j].abs() / nf + 1.0;
            if sd <= 1e-12 * scale {
                warn!("SIS: column {j} has zero variance");
                warnings.push(Warning::ZeroVarianceColumn { column: j });
                0.0
            } else {
                (cross[j] / sd).abs()
            }
        })
        .collect();
    let mut s = ScreeningScores::new(scores, ScreenMethod::Sis, ScreenParams::default());
    s.warnings = warnings;
    Ok(s)
}
