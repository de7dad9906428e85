//! Cholesky factorisation and solves for symmetric positive-definite systems.

use crate::error::{Error, Result};
use crate::matrix::{dot, DataMatrix};

/// Lower-triangular `L` with `A = L L^T`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdFactor {
    dim: usize,
    lower: Vec<f64>,
}

impl SpdFactor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn l(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.dim + j]
    }

    pub fn lower(&self) -> DataMatrix {
        DataMatrix::new(self.dim, self.dim, self.lower.clone()).expect("square factor")
    }

    /// Solves `A x = b` for a single right-hand side in place.
    pub fn solve_in_place(&self, b: &mut [f64]) -> Result<()> {
        let n = self.dim;
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                op: "spd_solve",
                left_rows: n,
                left_cols: n,
                right_rows: b.len(),
                right_cols: 1,
            });
        }
        // L y = b
        for i in 0..n {
            let row = &self.lower[i * n..i * n + i];
            b[i] = (b[i] - dot(row, &b[..i])) / self.l(i, i);
        }
        // L^T x = y
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l(k, i) * b[k];
            }
            b[i] = s / self.l(i, i);
        }
        Ok(())
    }
}

/// Relative tolerance for the symmetry precondition.
const SYMMETRY_TOL: f64 = 1e-10;

/// Cholesky factor of a symmetric positive-definite matrix.
///
/// A pivot is rejected when it falls below `64 n eps max_i A_ii`, which is
/// the rounding floor for an exactly singular input.
pub fn spd_factor(a: &DataMatrix) -> Result<SpdFactor> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch {
            op: "spd_factor",
            left_rows: n,
            left_cols: a.cols(),
            right_rows: a.cols(),
            right_cols: n,
        });
    }
    let scale = a.max_abs();
    let mut asym: f64 = 0.0;
    for i in 0..n {
        for j in 0..i {
            asym = asym.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if asym > SYMMETRY_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let max_diag = (0..n).fold(0.0f64, |m, i| m.max(a[(i, i)]));
    let floor = 64.0 * n as f64 * f64::EPSILON * max_diag;

    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let d = a[(j, j)] - dot(&l[j * n..j * n + j], &l[j * n..j * n + j]);
        if !(d > floor) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let djj = d.sqrt();
        l[j * n + j] = djj;
        for i in j + 1..n {
            let (head, tail) = l.split_at(i * n);
            let s = a[(i, j)] - dot(&tail[..j], &head[j * n..j * n + j]);
            l[i * n + j] = s / djj;
        }
    }
    Ok(SpdFactor { dim: n, lower: l })
}

/// `A^{-1} B` from a factor of `A`.
pub fn spd_solve(f: &SpdFactor, b: &DataMatrix) -> Result<DataMatrix> {
    if b.rows() != f.dim {
        return Err(Error::DimensionMismatch {
            op: "spd_solve",
            left_rows: f.dim,
            left_cols: f.dim,
            right_rows: b.rows(),
            right_cols: b.cols(),
        });
    }
    let mut out = DataMatrix::zeros(b.rows(), b.cols());
    let mut col = vec![0.0; f.dim];
    for j in 0..b.cols() {
        for i in 0..f.dim {
            col[i] = b[(i, j)];
        }
        f.solve_in_place(&mut col)?;
        for i in 0..f.dim {
            out[(i, j)] = col[i];
        }
    }
    Ok(out)
}
