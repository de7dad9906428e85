//! Cyclic coordinate descent for the Lasso path.
//!
//! Minimises `(1 / 2n) |y - b0 - Z b|^2 + lambda |b|_1` where `Z` holds
//! the columns standardized to mean 0 and `sum z^2 / n = 1`. Coefficients
//! are reported back on the original scale.

use super::{mean, FitResult};
use crate::error::{Error, Result};
use crate::matrix::{dot, DataMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LassoOptions {
    /// Converged once no coefficient (standardized scale) moves more than this in a full sweep.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Stop the path once the fraction of deviance explained exceeds 0.999
    /// or improves by less than a relative 1e-5 between consecutive
    /// lambdas (after the first five).
    pub early_stop: bool,
}

impl Default for LassoOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_sweeps: 100_000,
            early_stop: false,
        }
    }
}

const DEV_RATIO_MAX: f64 = 0.999;
const DEV_RATIO_MIN_GAIN: f64 = 1e-5;
const MIN_PATH_POINTS: usize = 5;

struct Standardized {
    cols: Vec<Vec<f64>>,
    means: Vec<f64>,
    scales: Vec<f64>,
    y_mean: f64,
    yc: Vec<f64>,
}

fn standardize(x: &DataMatrix, y: &[f64]) -> Standardized {
    let n = x.rows();
    let nf = n as f64;
    let mut cols = Vec::with_capacity(x.cols());
    let mut means = Vec::with_capacity(x.cols());
    let mut scales = Vec::with_capacity(x.cols());
    for j in 0..x.cols() {
        let mut c = x.column(j);
        let m = mean(&c);
        c.iter_mut().for_each(|v| *v -= m);
        let s = (dot(&c, &c) / nf).sqrt();
        if s > 1e-12 * (m.abs() + 1.0) {
            c.iter_mut().for_each(|v| *v /= s);
        } else {
            // Constant column; excluded from the fit.
            c.iter_mut().for_each(|v| *v = 0.0);
        }
        cols.push(c);
        means.push(m);
        scales.push(s);
    }
    let y_mean = mean(y);
    let yc = y.iter().map(|v| v - y_mean).collect();
    Standardized {
        cols,
        means,
        scales,
        y_mean,
        yc,
    }
}

/// `max_j |z_j^T (y - ybar)| / n` on standardized columns: the smallest
/// penalty at which every coefficient is zero.
pub fn lambda_max(x: &DataMatrix, y: &[f64]) -> f64 {
    let s = standardize(x, y);
    let nf = x.rows() as f64;
    s.cols.iter().fold(0.0, |m, c| m.max(dot(c, &s.yc).abs() / nf))
}

/// `count` log-spaced values from `lmax` down to `ratio * lmax`.
pub fn lambda_grid(lmax: f64, count: usize, ratio: f64) -> Vec<f64> {
    if count == 1 {
        return vec![lmax];
    }
    let step = ratio.ln() / (count - 1) as f64;
    (0..count).map(|k| lmax * (step * k as f64).exp()).collect()
}

pub fn lasso_path(x: &DataMatrix, y: &[f64], lambdas: &[f64]) -> Result<Vec<FitResult>> {
    lasso_path_with(x, y, lambdas, &LassoOptions::default())
}

/// Path with warm starts. With `early_stop` the returned path may be
/// shorter than `lambdas`.
pub fn lasso_path_with(
    x: &DataMatrix,
    y: &[f64],
    lambdas: &[f64],
    opts: &LassoOptions,
) -> Result<Vec<FitResult>> {
    let n = x.rows();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            op: "lasso_path",
            left_rows: n,
            left_cols: x.cols(),
            right_rows: y.len(),
            right_cols: 1,
        });
    }
    if lambdas.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
        return Err(Error::invalid("lambdas", "must be finite and non-negative"));
    }
    if lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("lambdas", "must be strictly descending"));
    }
    let nf = n as f64;
    let p = x.cols();
    let s = standardize(x, y);
    let null_dev = dot(&s.yc, &s.yc);
    let mut b = vec![0.0; p];
    let mut r = s.yc.clone();
    let mut fits = Vec::with_capacity(lambdas.len());
    let mut prev_ratio = 0.0;

    for (li, &lambda) in lambdas.iter().enumerate() {
        let mut sweeps = 0;
        loop {
            let delta = sweep(&s.cols, &mut b, &mut r, lambda, nf, None);
            sweeps += 1;
            if delta < opts.tol {
                break;
            }
            // Cycle over the active set until it settles, then re-check all.
            loop {
                if sweeps >= opts.max_sweeps {
                    return Err(Error::LassoNoConvergence {
                        lambda_index: li,
                        sweeps,
                    });
                }
                let active: Vec<usize> = (0..p).filter(|&j| b[j] != 0.0).collect();
                let d = sweep(&s.cols, &mut b, &mut r, lambda, nf, Some(&active));
                sweeps += 1;
                if d < opts.tol {
                    break;
                }
            }
            if sweeps >= opts.max_sweeps {
                return Err(Error::LassoNoConvergence {
                    lambda_index: li,
                    sweeps,
                });
            }
        }

        let fit = to_original_scale(x, y, &s, &b, lambda);
        let ratio = if null_dev > 0.0 { 1.0 - dot(&r, &r) / null_dev } else { 1.0 };
        fits.push(fit);
        if opts.early_stop
            && li + 1 >= MIN_PATH_POINTS
            && (ratio > DEV_RATIO_MAX || ratio - prev_ratio < DEV_RATIO_MIN_GAIN * ratio)
        {
            break;
        }
        prev_ratio = ratio;
    }
    Ok(fits)
}

/// One coordinate-descent pass; returns the largest coefficient change.
fn sweep(
    cols: &[Vec<f64>],
    b: &mut [f64],
    r: &mut [f64],
    lambda: f64,
    nf: f64,
    subset: Option<&[usize]>,
) -> f64 {
    let mut max_delta: f64 = 0.0;
    let mut update = |j: usize| {
        let c = &cols[j];
        let old = b[j];
        let rho = dot(c, r) / nf + old;
        let new = soft_threshold(rho, lambda);
        if new != old {
            let diff = new - old;
            r.iter_mut().zip(c).for_each(|(ri, ci)| *ri -= diff * ci);
            b[j] = new;
            max_delta = max_delta.max(diff.abs());
        }
    };
    match subset {
        Some(idx) => idx.iter().for_each(|&j| update(j)),
        None => (0..cols.len()).filter(|&j| cols[j].iter().any(|v| *v != 0.0)).for_each(update),
    }
    max_delta
}

#[inline]
fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

fn to_original_scale(x: &DataMatrix, y: &[f64], s: &Standardized, b: &[f64], lambda: f64) -> FitResult {
    let support: Vec<usize> = (0..b.len()).filter(|&j| b[j] != 0.0).collect();
    let coefficients: Vec<f64> = support.iter().map(|&j| b[j] / s.scales[j]).collect();
    let intercept = s.y_mean
        - support
            .iter()
            .zip(&coefficients)
            .map(|(&j, c)| c * s.means[j])
            .sum::<f64>();
    let mut fit = FitResult {
        support,
        coefficients,
        intercept,
        rss: 0.0,
        lambda,
    };
    fit.rss = (0..x.rows())
        .map(|i| {
            let e = y[i] - fit.predict_row(x.row(i));
            e * e
        })
        .sum();
    fit
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gaussian(n: usize, p: usize, seed: u64) -> DataMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DataMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal))
    }

    fn noisy_response(x: &DataMatrix, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..x.rows())
            .map(|i| 1.0 + 2.0 * x[(i, 0)] - 1.0 * x[(i, 3)] + 0.5 * x[(i, 5)] + rng.sample::<f64, _>(StandardNormal))
            .collect()
    }

    /// Standardized design (mean 0, sum z^2 / n = 1), as the KKT check needs.
    fn standardized(x: &DataMatrix) -> DataMatrix {
        let s = standardize(x, &vec![0.0; x.rows()]);
        DataMatrix::from_fn(x.rows(), x.cols(), |i, j| s.cols[j][i])
    }

    #[test]
    fn above_lambda_max_everything_is_zero() {
        let x = gaussian(30, 8, 1);
        let y = noisy_response(&x, 2);
        let lmax = lambda_max(&x, &y);
        let fits = lasso_path(&x, &y, &[lmax * 1.5, lmax]).unwrap();
        assert!(fits.iter().all(|f| f.support.is_empty()));
        let below = lasso_path(&x, &y, &[lmax * 0.99]).unwrap();
        assert_eq!(below[0].support.len(), 1);
    }

    #[test]
    fn single_predictor_zero_penalty_is_ols() {
        let x = DataMatrix::column_vector(&[1.0, 2.0, 4.0, 7.0, 8.0]);
        let y = [3.0, 5.0, 4.0, 11.0, 12.0];
        let fit = &lasso_path(&x, &y, &[0.0]).unwrap()[0];
        let xm = 22.0 / 5.0;
        let ym = 35.0 / 5.0;
        let sxy: f64 = (0..5).map(|i| (x[(i, 0)] - xm) * (y[i] - ym)).sum();
        let sxx: f64 = (0..5).map(|i| (x[(i, 0)] - xm).powi(2)).sum();
        assert!((fit.coefficients[0] - sxy / sxx).abs() < 1e-9);
        assert!((fit.intercept - (ym - sxy / sxx * xm)).abs() < 1e-9);
    }

    #[test]
    fn kkt_conditions_hold() {
        let x = standardized(&gaussian(30, 8, 3));
        let y = noisy_response(&x, 4);
        let lambda = 0.1;
        let fit = &lasso_path(&x, &y, &[lambda]).unwrap()[0];
        let beta = fit.dense_coefficients(8);
        let r: Vec<f64> = (0..30).map(|i| y[i] - fit.predict_row(x.row(i))).collect();
        for j in 0..8 {
            let g = dot(&x.column(j), &r) / 30.0;
            if beta[j] == 0.0 {
                assert!(g.abs() <= lambda + 1e-6, "inactive {j}: {g}");
            } else {
                assert!((g - lambda * beta[j].signum()).abs() <= 1e-6, "active {j}: {g}");
            }
        }
        assert!(!fit.support.is_empty());
    }

    #[test]
    fn rss_matches_residuals() {
        let x = gaussian(40, 12, 5);
        let y = noisy_response(&x, 6);
        let lmax = lambda_max(&x, &y);
        for fit in lasso_path(&x, &y, &lambda_grid(lmax, 20, 0.01)).unwrap() {
            let rss: f64 = (0..40).map(|i| (y[i] - fit.predict_row(x.row(i))).powi(2)).sum();
            assert!((rss - fit.rss).abs() <= 1e-8 * rss);
        }
    }

    #[test]
    fn doubling_sweep_cap_changes_nothing() {
        let x = gaussian(40, 30, 7);
        let y = noisy_response(&x, 8);
        let grid = lambda_grid(lambda_max(&x, &y), 30, 0.01);
        let a = lasso_path_with(&x, &y, &grid, &LassoOptions::default()).unwrap();
        let opts = LassoOptions {
            max_sweeps: 200_000,
            ..LassoOptions::default()
        };
        let b = lasso_path_with(&x, &y, &grid, &opts).unwrap();
        for (fa, fb) in a.iter().zip(&b) {
            let (da, db) = (fa.dense_coefficients(30), fb.dense_coefficients(30));
            assert!(da.iter().zip(&db).all(|(u, v)| (u - v).abs() < 1e-6));
        }
    }

    #[test]
    fn sweep_cap_reports_lambda_index() {
        let x = gaussian(20, 15, 9);
        let y = noisy_response(&x, 10);
        let opts = LassoOptions {
            max_sweeps: 2,
            ..LassoOptions::default()
        };
        let grid = lambda_grid(lambda_max(&x, &y), 10, 0.001);
        match lasso_path_with(&x, &y, &grid, &opts) {
            Err(Error::LassoNoConvergence { lambda_index, .. }) => assert!(lambda_index > 0),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn grid_shape() {
        let g = lambda_grid(2.0, 100, 0.001);
        assert_eq!(g.len(), 100);
        assert_eq!(g[0], 2.0);
        assert!((g[99] - 0.002).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn rejects_unsorted_lambdas() {
        let x = gaussian(10, 3, 11);
        assert!(lasso_path(&x, &[0.0; 10], &[0.1, 0.2]).is_err());
    }
}
