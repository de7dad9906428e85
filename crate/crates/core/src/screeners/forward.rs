use super::{check_response, ScreenMethod, ScreenParams, ScreeningScores};
use crate::error::{Error, Result};
use crate::matrix::{dot, DataMatrix};

/// A candidate whose component orthogonal to the current fit keeps less
/// than this fraction of its squared norm is treated as collinear.
const COLLINEAR_TOL: f64 = 1e-12;

/// Greedy forward regression with an intercept.
///
/// Each step adds the column whose inclusion lowers the residual sum of
/// squares the most; that reduction is `(x_j^T r)^2 / |x_j - Q Q^T x_j|^2`
/// for the current residual `r` and orthonormal basis `Q` of the selected
/// columns. Both the cross products `x_j^T r` and the orthogonal norms are
/// downdated with one pass over `X` per step, so a step costs `O(n p)`.
///
/// The returned scores are `d` for the first pick, `d - 1` for the second,
/// and so on; unselected columns score 0. Equal reductions go to the lower
/// column index. Selection stops early if every remaining column is
/// collinear with the current fit.
pub fn forward_regression_rank(x: &DataMatrix, y: &[f64], d: usize) -> Result<ScreeningScores> {
    check_response(x, y)?;
    let (n, p) = x.shape();
    if d > n.saturating_sub(1).min(p) {
        return Err(Error::invalid(
            "d",
            format!("forward regression selects at most min(n - 1, p) = {} predictors, got {d}", n.saturating_sub(1).min(p)),
        ));
    }
    let params = ScreenParams {
        target_size: Some(d),
        ..ScreenParams::default()
    };
    let mut scores = vec![0.0; p];
    if d == 0 {
        return Ok(ScreeningScores::new(scores, ScreenMethod::ForwardRegression, params));
    }

    let nf = n as f64;
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n); p];
    for i in 0..n {
        for (c, &v) in cols.iter_mut().zip(x.row(i)) {
            c.push(v);
        }
    }
    for c in cols.iter_mut() {
        let m = c.iter().sum::<f64>() / nf;
        c.iter_mut().for_each(|v| *v -= m);
    }
    let ybar = y.iter().sum::<f64>() / nf;
    let mut r: Vec<f64> = y.iter().map(|v| v - ybar).collect();

    let full_norm2: Vec<f64> = cols.iter().map(|c| dot(c, c)).collect();
    let mut norm2 = full_norm2.clone();
    let mut corr: Vec<f64> = cols.iter().map(|c| dot(c, &r)).collect();
    let mut active = vec![true; p];
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);

    let mut step = 0;
    while step < d {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..p {
            if !active[j] || norm2[j] <= COLLINEAR_TOL * full_norm2[j] {
                continue;
            }
            let gain = corr[j] * corr[j] / norm2[j];
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((j, gain));
            }
        }
        let Some((j, _)) = best else { break };
        active[j] = false;

        // Re-orthogonalise explicitly; the downdated norm can drift.
        let mut q = cols[j].clone();
        for _ in 0..2 {
            for b in &basis {
                let proj = dot(b, &q);
                q.iter_mut().zip(b).for_each(|(v, bv)| *v -= proj * bv);
            }
        }
        let qn2 = dot(&q, &q);
        if qn2 <= COLLINEAR_TOL * full_norm2[j] {
            continue;
        }
        let qn = qn2.sqrt();
        q.iter_mut().for_each(|v| *v /= qn);

        let qr = dot(&q, &r);
        r.iter_mut().zip(&q).for_each(|(v, qv)| *v -= qr * qv);
        for k in 0..p {
            if active[k] {
                let c = dot(&q, &cols[k]);
                norm2[k] -= c * c;
                corr[k] -= qr * c;
            }
        }
        basis.push(q);
        scores[j] = (d - step) as f64;
        step += 1;
    }
    Ok(ScreeningScores::new(scores, ScreenMethod::ForwardRegression, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svd::svd_small;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gaussian(n: usize, p: usize, seed: u64) -> DataMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DataMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal))
    }

    /// Brute-force reference: at each step refit OLS for every candidate.
    fn brute_force(x: &DataMatrix, y: &[f64], d: usize) -> Vec<usize> {
        let n = x.rows();
        let mut chosen: Vec<usize> = Vec::new();
        for _ in 0..d {
            let mut best = (usize::MAX, f64::INFINITY);
            for j in 0..x.cols() {
                if chosen.contains(&j) {
                    continue;
                }
                let mut idx = chosen.clone();
                idx.push(j);
                // design with intercept
                let design = DataMatrix::from_fn(n, idx.len() + 1, |i, k| if k == 0 { 1.0 } else { x[(i, idx[k - 1])] });
                let pinv = svd_small(&design).unwrap().pinv();
                let coef = pinv.mul_vec(y).unwrap();
                let fit = design.mul_vec(&coef).unwrap();
                let rss: f64 = fit.iter().zip(y).map(|(f, v)| (v - f).powi(2)).sum();
                if rss < best.1 - 1e-9 {
                    best = (j, rss);
                }
            }
            chosen.push(best.0);
        }
        chosen
    }

    fn order(s: &ScreeningScores) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..s.len()).filter(|&j| s.scores[j] > 0.0).collect();
        idx.sort_by(|&a, &b| s.scores[b].total_cmp(&s.scores[a]));
        idx
    }

    #[test]
    fn matches_brute_force_refits() {
        for seed in 0..5 {
            let x = gaussian(20, 12, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let y: Vec<f64> = (0..20)
                .map(|i| 2.0 * x[(i, 3)] - x[(i, 7)] + 0.5 * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let s = forward_regression_rank(&x, &y, 6).unwrap();
            assert_eq!(order(&s), brute_force(&x, &y, 6), "seed {seed}");
        }
    }

    #[test]
    fn orthonormal_columns_pick_largest_coefficients_first() {
        let q = svd_small(&gaussian(30, 8, 1)).unwrap().u;
        let mut x = q.clone();
        for j in 0..8 {
            let m = (0..30).map(|i| q[(i, j)]).sum::<f64>() / 30.0;
            for i in 0..30 {
                x[(i, j)] -= m;
            }
        }
        let beta = [0.0, 4.0, 0.0, -7.0, 0.0, 1.5, 0.0, 0.0];
        let y = x.mul_vec(&beta).unwrap();
        let s = forward_regression_rank(&x, &y, 3).unwrap();
        assert_eq!(order(&s), vec![3, 1, 5]);
        assert_eq!(s.scores[3], 3.0);
        assert_eq!(s.scores[5], 1.0);
    }

    #[test]
    fn zero_target_is_empty() {
        let x = gaussian(10, 5, 2);
        let s = forward_regression_rank(&x, &[1.0; 10], 0).unwrap();
        assert!(s.scores.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn collinear_candidate_is_skipped() {
        let mut x = gaussian(15, 4, 3);
        for i in 0..15 {
            x[(i, 2)] = 2.0 * x[(i, 0)];
        }
        let y: Vec<f64> = (0..15).map(|i| x[(i, 0)] + 0.3 * x[(i, 1)]).collect();
        let s = forward_regression_rank(&x, &y, 3).unwrap();
        assert_eq!(s.scores.iter().filter(|&&v| v > 0.0).count(), 3);
        // column 0 and its multiple cannot both be selected
        assert!(s.scores[0] == 0.0 || s.scores[2] == 0.0);
    }

    #[test]
    fn target_too_large() {
        let x = gaussian(10, 50, 4);
        assert!(forward_regression_rank(&x, &[0.0; 10], 10).is_err());
        assert!(forward_regression_rank(&x, &[0.0; 10], 9).is_ok());
    }
}
