use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_response, rank_select, ScreenMethod, ScreenParams, ScreeningScores, SelectionRule, SubmodelSelection};
use crate::cholesky::spd_factor;
use crate::error::{Error, Result};
use crate::matrix::{gram_rows, DataMatrix};

/// Ridge parameter used when HOLP has to fall back to its ridge form.
pub const DEFAULT_RIDGE: f64 = 10.0;

/// Smallest number of rows a Divide-HOLP block may have.
pub const MIN_BLOCK_ROWS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolpOptions {
    /// Center the columns of `X` and the response before projecting.
    pub center: bool,
    /// Ridge parameter used once centering has made `X X^T` singular.
    pub ridge_fallback: f64,
}

impl Default for HolpOptions {
    fn default() -> Self {
        Self {
            center: false,
            ridge_fallback: DEFAULT_RIDGE,
        }
    }
}

/// `|X^T (X X^T)^{-1} Y|` on raw `X` and `Y`.
pub fn holp_scores(x: &DataMatrix, y: &[f64]) -> Result<ScreeningScores> {
    holp_scores_with(x, y, &HolpOptions::default())
}

pub fn holp_scores_with(x: &DataMatrix, y: &[f64], opts: &HolpOptions) -> Result<ScreeningScores> {
    check_response(x, y)?;
    let (n, p) = x.shape();
    if p <= n {
        return Err(Error::DegenerateRegime { n, p });
    }
    if opts.center {
        let (xc, yc) = center(x, y);
        let mut s = projection_scores(&xc, &yc, opts.ridge_fallback, ScreenMethod::RidgeHolp)?;
        s.params.centered = true;
        return Ok(s);
    }
    projection_scores(x, y, 0.0, ScreenMethod::Holp)
}

/// `|X^T (X X^T + r I)^{-1} Y|`; defined for any `p`.
pub fn ridge_holp_scores(x: &DataMatrix, y: &[f64], r: f64) -> Result<ScreeningScores> {
    check_response(x, y)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid("ridge", format!("must be positive and finite, got {r}")));
    }
    projection_scores(x, y, r, ScreenMethod::RidgeHolp)
}

fn projection_scores(x: &DataMatrix, y: &[f64], r: f64, method: ScreenMethod) -> Result<ScreeningScores> {
    let mut g = gram_rows(x);
    if r > 0.0 {
        g.add_diagonal(r);
    }
    let f = spd_factor(&g)?;
    let mut w = y.to_vec();
    f.solve_in_place(&mut w)?;
    let beta = x.tr_mul_vec(&w)?;
    let scores = beta.into_iter().map(f64::abs).collect();
    let params = ScreenParams {
        ridge: (r > 0.0).then_some(r),
        ..ScreenParams::default()
    };
    Ok(ScreeningScores::new(scores, method, params))
}

fn center(x: &DataMatrix, y: &[f64]) -> (DataMatrix, Vec<f64>) {
    let (n, p) = x.shape();
    let mut means = vec![0.0; p];
    for i in 0..n {
        crate::matrix::axpy(1.0 / n as f64, x.row(i), &mut means);
    }
    let mut xc = x.clone();
    for i in 0..n {
        for (v, m) in xc.row_mut(i).iter_mut().zip(&means) {
            *v -= m;
        }
    }
    let ybar = y.iter().sum::<f64>() / n as f64;
    (xc, y.iter().map(|v| v - ybar).collect())
}

/// Divide-HOLP: HOLP on `m` row blocks, top `ceil(d / m)` of each, unioned.
///
/// Rows are shuffled with `seed` and cut into `m` contiguous blocks whose
/// sizes differ by at most one. The union lists every block's rank-1 pick,
/// then every rank-2 pick, and so on, dropping repeats; it may hold fewer
/// than `d` indices. With `m = 1` no shuffle is done and the result equals
/// `rank_select(holp_scores(X, Y), d)`.
pub fn divide_holp_scores(
    x: &DataMatrix,
    y: &[f64],
    m: usize,
    d: usize,
    seed: u64,
) -> Result<SubmodelSelection> {
    check_response(x, y)?;
    let n = x.rows();
    if m == 0 {
        return Err(Error::invalid("partitions", "must be at least 1"));
    }
    if n / m < MIN_BLOCK_ROWS {
        return Err(Error::invalid(
            "partitions",
            format!("{m} blocks of {n} rows leaves fewer than {MIN_BLOCK_ROWS} rows per block"),
        ));
    }
    if m == 1 {
        let scores = holp_scores(x, y).map_err(|e| Error::Block {
            block: 0,
            source: Box::new(e),
        })?;
        return rank_select(&scores, d);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let quota = d.div_ceil(m);
    let (base, extra) = (n / m, n % m);
    let mut start = 0;
    let mut picks = Vec::with_capacity(m);
    for b in 0..m {
        let len = base + usize::from(b < extra);
        let rows = &order[start..start + len];
        start += len;
        let xb = x.select_rows(rows);
        let yb: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
        let block = holp_scores(&xb, &yb)
            .and_then(|s| rank_select(&s, quota.min(s.len())))
            .map_err(|e| Error::Block {
                block: b,
                source: Box::new(e),
            })?;
        picks.push(block.indices);
    }

    let mut seen = vec![false; x.cols()];
    let mut indices = Vec::new();
    for rank in 0..quota {
        for block in &picks {
            if let Some(&j) = block.get(rank) {
                if !seen[j] {
                    seen[j] = true;
                    indices.push(j);
                }
            }
        }
    }
    Ok(SubmodelSelection {
        indices,
        rule: SelectionRule::TopD(d),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{mat_mul, Transpose};
    use crate::screeners::sis_scores_with;
    use crate::screeners::SisOptions;
    use crate::svd::svd_small;
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;

    fn gaussian(n: usize, p: usize, seed: u64) -> DataMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DataMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal))
    }

    fn response(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn orthonormal_rows_reduce_to_marginal_products() {
        // Rows of the transposed Q factor of a tall Gaussian matrix.
        let svd = svd_small(&gaussian(12, 4, 1)).unwrap();
        let x = svd.u.transpose();
        let y = response(4, 2);
        let h = holp_scores(&x, &y).unwrap();
        let s = sis_scores_with(&x, &y, &SisOptions { standardize: false }).unwrap();
        for (a, b) in h.scores.iter().zip(&s.scores) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_pseudo_inverse_oracle() {
        let x = gaussian(8, 40, 3);
        let y = response(8, 4);
        let pinv = svd_small(&x).unwrap().pinv();
        let oracle = pinv.mul_vec(&y).unwrap();
        let h = holp_scores(&x, &y).unwrap();
        for (a, b) in h.scores.iter().zip(&oracle) {
            assert!((a - b.abs()).abs() <= 1e-8 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn degenerate_regime_is_an_error() {
        let x = gaussian(10, 10, 5);
        assert!(matches!(holp_scores(&x, &response(10, 6)), Err(Error::DegenerateRegime { n: 10, p: 10 })));
    }

    #[test]
    fn duplicated_rows_suggest_ridge() {
        let mut x = gaussian(6, 30, 7);
        let r0 = x.row(0).to_vec();
        x.row_mut(1).copy_from_slice(&r0);
        let err = holp_scores(&x, &response(6, 8)).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { .. }));
        assert!(err.to_string().contains("ridge_holp_scores"));
    }

    #[test]
    fn ridge_limit_matches_holp() {
        let x = gaussian(10, 60, 9);
        let y = response(10, 10);
        let h = holp_scores(&x, &y).unwrap();
        let r = ridge_holp_scores(&x, &y, 1e-10).unwrap();
        for (a, b) in h.scores.iter().zip(&r.scores) {
            assert!((a - b).abs() <= 1e-6 * a.abs().max(1e-12));
        }
    }

    #[test]
    fn ridge_woodbury_identity() {
        let x = gaussian(5, 12, 11);
        let y = response(5, 12);
        for r in [1e-3, 1.0, 10.0] {
            let lhs = ridge_holp_scores(&x, &y, r).unwrap();
            let mut xtx = mat_mul(&x, &x, Transpose::Yes, Transpose::No).unwrap();
            xtx.add_diagonal(r);
            let f = spd_factor(&xtx).unwrap();
            let mut rhs = x.tr_mul_vec(&y).unwrap();
            f.solve_in_place(&mut rhs).unwrap();
            for (a, b) in lhs.scores.iter().zip(&rhs) {
                assert!((a - b.abs()).abs() <= 1e-9 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn ridge_rejects_non_positive() {
        let x = gaussian(5, 12, 13);
        assert!(ridge_holp_scores(&x, &response(5, 1), 0.0).is_err());
        assert!(ridge_holp_scores(&x, &response(5, 1), -1.0).is_err());
        // p <= n is fine for the ridge form.
        let tall = gaussian(20, 5, 14);
        assert!(ridge_holp_scores(&tall, &response(20, 1), 1.0).is_ok());
    }

    #[test]
    fn centering_routes_to_ridge() {
        let x = gaussian(20, 100, 15);
        let y = response(20, 16);
        let s = holp_scores_with(&x, &y, &HolpOptions { center: true, ..Default::default() }).unwrap();
        assert_eq!(s.method, ScreenMethod::RidgeHolp);
        assert_eq!(s.params.ridge, Some(DEFAULT_RIDGE));
        assert!(s.params.centered);
    }

    #[test]
    fn divide_with_one_block_is_plain_holp() {
        let x = gaussian(40, 200, 17);
        let y = response(40, 18);
        let a = divide_holp_scores(&x, &y, 1, 25, 99).unwrap();
        let b = rank_select(&holp_scores(&x, &y).unwrap(), 25).unwrap();
        assert_eq!(a.indices, b.indices);
    }

    #[test]
    fn divide_union_has_no_duplicates_and_respects_quota() {
        let x = gaussian(60, 300, 19);
        let y = response(60, 20);
        let s = divide_holp_scores(&x, &y, 3, 20, 1).unwrap();
        let mut sorted = s.indices.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), s.indices.len());
        assert!(s.indices.len() <= 21 && s.indices.len() >= 7);
    }

    #[test]
    fn divide_blocks_too_small() {
        let x = gaussian(40, 200, 21);
        let y = response(40, 22);
        assert!(divide_holp_scores(&x, &y, 40, 10, 0).is_err());
        assert!(divide_holp_scores(&x, &y, 0, 10, 0).is_err());
        assert!(divide_holp_scores(&x, &y, 5, 10, 0).is_err());
        assert!(divide_holp_scores(&x, &y, 4, 10, 0).is_ok());
    }
}
