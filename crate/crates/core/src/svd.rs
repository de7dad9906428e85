//! One-sided Jacobi SVD for small matrices.
//!
//! Only used as a reference: the pseudo-inverse oracle in tests and the
//! `U U^T` projection checks. The screening path never calls it.

use crate::error::{Error, Result};
use crate::matrix::{dot, DataMatrix};

pub const MAX_SVD_DIM: usize = 512;
const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U diag(D) V^T` with `r = min(rows, cols)` columns in `U` and `V`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DataMatrix,
    pub singular_values: Vec<f64>,
    pub v: DataMatrix,
}

impl Svd {
    /// Moore-Penrose inverse `V D^+ U^T`, zeroing singular values below
    /// `max(rows, cols) * eps * sigma_max`.
    pub fn pinv(&self) -> DataMatrix {
        let m = self.u.rows();
        let n = self.v.rows();
        let smax = self.singular_values.first().copied().unwrap_or(0.0);
        let cutoff = m.max(n) as f64 * f64::EPSILON * smax;
        let mut out = DataMatrix::zeros(n, m);
        for (k, &s) in self.singular_values.iter().enumerate() {
            if s <= cutoff {
                continue;
            }
            for i in 0..n {
                let vik = self.v[(i, k)] / s;
                for j in 0..m {
                    out[(i, j)] += vik * self.u[(j, k)];
                }
            }
        }
        out
    }
}

pub fn svd_small(a: &DataMatrix) -> Result<Svd> {
    let (m, n) = a.shape();
    if m.min(n) > MAX_SVD_DIM {
        return Err(Error::invalid(
            "a",
            format!("svd_small handles min(rows, cols) <= {MAX_SVD_DIM}, got {m}x{n}"),
        ));
    }
    if m >= n {
        jacobi_tall(a)
    } else {
        let t = jacobi_tall(&a.transpose())?;
        Ok(Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        })
    }
}

fn jacobi_tall(a: &DataMatrix) -> Result<Svd> {
    let (m, n) = a.shape();
    // Column-major working copies.
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut vcols: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let tol = f64::EPSILON * m as f64;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut vcols, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<(usize, f64)> = cols.iter().map(|c| dot(c, c).sqrt()).enumerate().collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));

    let smax = order.first().map_or(0.0, |o| o.1);
    let zero = smax * f64::EPSILON * m.max(n) as f64;
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut sv = Vec::with_capacity(n);
    let mut v = DataMatrix::zeros(n, n);
    let mut pending = Vec::new();
    for (k, &(j, s)) in order.iter().enumerate() {
        for i in 0..n {
            v[(i, k)] = vcols[j][i];
        }
        if s > zero {
            u_cols.push(cols[j].iter().map(|x| x / s).collect());
            sv.push(s);
        } else {
            u_cols.push(vec![0.0; m]);
            sv.push(0.0);
            pending.push(k);
        }
    }
    complete_orthonormal(&mut u_cols, &pending, m);

    let u = DataMatrix::from_fn(m, n, |i, k| u_cols[k][i]);
    Ok(Svd {
        u,
        singular_values: sv,
        v,
    })
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    let (cp, cq) = (&mut lo[p], &mut hi[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Fills the zero columns listed in `pending` with unit vectors orthogonal
/// to every other column, drawing candidates from the standard basis.
fn complete_orthonormal(cols: &mut [Vec<f64>], pending: &[usize], m: usize) {
    let mut basis = 0;
    for &k in pending {
        while basis < m {
            let mut v = vec![0.0; m];
            v[basis] = 1.0;
            basis += 1;
            for _ in 0..2 {
                for (j, c) in cols.iter().enumerate() {
                    if j == k {
                        continue;
                    }
                    let proj = dot(c, &v);
                    for (vi, ci) in v.iter_mut().zip(c) {
                        *vi -= proj * ci;
                    }
                }
            }
            let nrm = dot(&v, &v).sqrt();
            if nrm > 1e-6 {
                cols[k] = v.into_iter().map(|x| x / nrm).collect();
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{mat_mul, Transpose};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> DataMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DataMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    fn reconstruct(s: &Svd) -> DataMatrix {
        let us = DataMatrix::from_fn(s.u.rows(), s.u.cols(), |i, k| s.u[(i, k)] * s.singular_values[k]);
        mat_mul(&us, &s.v, Transpose::No, Transpose::Yes).unwrap()
    }

    fn orthonormality_error(q: &DataMatrix) -> f64 {
        let qtq = mat_mul(q, q, Transpose::Yes, Transpose::No).unwrap();
        qtq.sub(&DataMatrix::identity(q.cols())).unwrap().max_abs()
    }

    #[test]
    fn diagonal() {
        let a = DataMatrix::from_rows(&[[1.0, 0.0], [0.0, 3.0]]).unwrap();
        let s = svd_small(&a).unwrap();
        assert!((s.singular_values[0] - 3.0).abs() < 1e-15);
        assert!((s.singular_values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rank_one() {
        let u = [1.0, -2.0, 0.5, 3.0];
        let v = [2.0, 1.0, -1.0];
        let a = DataMatrix::from_fn(4, 3, |i, j| u[i] * v[j]);
        let s = svd_small(&a).unwrap();
        assert_eq!(s.singular_values.iter().filter(|&&x| x > 1e-10).count(), 1);
        assert!(orthonormality_error(&s.u) < 1e-8);
        assert!(reconstruct(&s).sub(&a).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn wide_random_pinv_axioms() {
        let a = random(6, 9, 11);
        let s = svd_small(&a).unwrap();
        assert!(orthonormality_error(&s.u) < 1e-8);
        assert!(orthonormality_error(&s.v) < 1e-8);
        assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
        let p = s.pinv();
        let apa = mat_mul(&mat_mul(&a, &p, Transpose::No, Transpose::No).unwrap(), &a, Transpose::No, Transpose::No)
            .unwrap();
        assert!(apa.sub(&a).unwrap().max_abs() < 1e-8);
        let pap = mat_mul(&mat_mul(&p, &a, Transpose::No, Transpose::No).unwrap(), &p, Transpose::No, Transpose::No)
            .unwrap();
        assert!(pap.sub(&p).unwrap().max_abs() < 1e-8);
    }

    #[test]
    fn reconstruction_tall_and_wide() {
        for (m, n, seed) in [(12, 5, 1), (5, 12, 2), (30, 30, 3)] {
            let a = random(m, n, seed);
            let s = svd_small(&a).unwrap();
            assert!(reconstruct(&s).sub(&a).unwrap().max_abs() <= 1e-8 * a.max_abs());
        }
    }

    #[test]
    fn too_large_is_rejected() {
        assert!(svd_small(&DataMatrix::zeros(513, 513)).is_err());
    }
}
