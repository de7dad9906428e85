use super::{mean, FitResult};
use crate::error::{Error, Result};
use crate::matrix::{dot, DataMatrix};

/// Relative residual norm below which a column counts as dependent.
const DEPENDENCE_TOL: f64 = 1e-10;

/// Least-squares fit with intercept on the columns in `support`.
///
/// Solved by modified Gram-Schmidt (two passes) on the centered columns,
/// then back substitution.
pub fn ols_refit(x: &DataMatrix, y: &[f64], support: &[usize]) -> Result<FitResult> {
    let n = x.rows();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            op: "ols_refit",
            left_rows: n,
            left_cols: x.cols(),
            right_rows: y.len(),
            right_cols: 1,
        });
    }
    if support.len() >= n {
        return Err(Error::invalid(
            "support",
            format!("{} columns plus an intercept cannot be fit with {n} observations", support.len()),
        ));
    }
    if let Some(&j) = support.iter().find(|&&j| j >= x.cols()) {
        return Err(Error::invalid("support", format!("column {j} out of range")));
    }
    let k = support.len();
    let ybar = mean(y);
    let yc: Vec<f64> = y.iter().map(|v| v - ybar).collect();

    let mut means = Vec::with_capacity(k);
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(k);
    // r is upper triangular, stored by column.
    let mut r = vec![vec![0.0; k]; k];
    for (c, &j) in support.iter().enumerate() {
        let col = x.column(j);
        let m = mean(&col);
        means.push(m);
        let mut v: Vec<f64> = col.iter().map(|a| a - m).collect();
        let norm0 = dot(&v, &v).sqrt();
        for _ in 0..2 {
            for (b, qb) in q.iter().enumerate() {
                let proj = dot(qb, &v);
                r[c][b] += proj;
                v.iter_mut().zip(qb).for_each(|(vi, qi)| *vi -= proj * qi);
            }
        }
        let nv = dot(&v, &v).sqrt();
        if !(nv > DEPENDENCE_TOL * norm0) || norm0 == 0.0 {
            return Err(Error::RankDeficient { column: j });
        }
        r[c][c] = nv;
        v.iter_mut().for_each(|vi| *vi /= nv);
        q.push(v);
    }

    let qty: Vec<f64> = q.iter().map(|qc| dot(qc, &yc)).collect();
    let mut beta = vec![0.0; k];
    for c in (0..k).rev() {
        let mut s = qty[c];
        for (c2, b) in beta.iter().enumerate().skip(c + 1) {
            s -= r[c2][c] * b;
        }
        beta[c] = s / r[c][c];
    }
    let intercept = ybar - beta.iter().zip(&means).map(|(b, m)| b * m).sum::<f64>();
    let mut fit = FitResult {
        support: support.to_vec(),
        coefficients: beta,
        intercept,
        rss: 0.0,
        lambda: 0.0,
    };
    fit.rss = (0..n)
        .map(|i| {
            let e = y[i] - fit.predict_row(x.row(i));
            e * e
        })
        .sum();
    Ok(fit)
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

    #[test]
    fn empty_support_is_the_mean() {
        let x = gaussian(5, 3, 1);
        let y = [1.0, 2.0, 3.0, 4.0, 10.0];
        let f = ols_refit(&x, &y, &[]).unwrap();
        assert_eq!(f.intercept, 4.0);
        assert!((f.rss - (9.0 + 4.0 + 1.0 + 0.0 + 36.0)).abs() < 1e-12);
    }

    #[test]
    fn noiseless_recovery() {
        let x = gaussian(30, 10, 2);
        let y: Vec<f64> = (0..30).map(|i| 1.5 + 2.0 * x[(i, 2)] - 3.0 * x[(i, 7)]).collect();
        let f = ols_refit(&x, &y, &[7, 2]).unwrap();
        let ynorm2: f64 = y.iter().map(|v| v * v).sum();
        assert!(f.rss <= 1e-16 * ynorm2, "{}", f.rss);
        assert!((f.coefficients[0] + 3.0).abs() < 1e-10);
        assert!((f.coefficients[1] - 2.0).abs() < 1e-10);
        assert!((f.intercept - 1.5).abs() < 1e-10);
    }

    #[test]
    fn residuals_orthogonal_to_design() {
        let x = gaussian(25, 8, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let y: Vec<f64> = (0..25).map(|_| rng.sample(StandardNormal)).collect();
        let support = [0, 3, 5, 6];
        let f = ols_refit(&x, &y, &support).unwrap();
        let res: Vec<f64> = (0..25).map(|i| y[i] - f.predict_row(x.row(i))).collect();
        assert!(res.iter().sum::<f64>().abs() < 1e-8);
        for &j in &support {
            assert!(dot(&x.column(j), &res).abs() < 1e-8);
        }
        let rss: f64 = res.iter().map(|e| e * e).sum();
        assert!((rss - f.rss).abs() <= 1e-8 * rss);
    }

    #[test]
    fn dependent_column_is_named() {
        let mut x = gaussian(20, 5, 5);
        for i in 0..20 {
            x[(i, 4)] = x[(i, 1)] - 0.5 * x[(i, 2)];
        }
        let err = ols_refit(&x, &[0.0; 20], &[1, 2, 4]).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { column: 4 }));
    }

    #[test]
    fn too_many_columns() {
        let x = gaussian(4, 6, 6);
        assert!(ols_refit(&x, &[0.0; 4], &[0, 1, 2, 3]).is_err());
    }
}
