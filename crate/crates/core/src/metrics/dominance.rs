use crate::cholesky::spd_factor;
use crate::error::{Error, Result};
use crate::matrix::{gram_rows, mat_mul, DataMatrix, Transpose};

/// `X_Sᵀ (X Xᵀ)⁻¹ X_S` for the columns `S`, i.e. the rows and columns `S`
/// of the HOLP screening matrix.
pub fn holp_projection(x: &DataMatrix, columns: &[usize]) -> Result<DataMatrix> {
    let factor = spd_factor(&gram_rows(x))?;
    let xs = x.select_columns(columns);
    let mut solved = xs.clone();
    for c in 0..solved.cols() {
        let mut col = solved.column(c);
        factor.solve_in_place(&mut col)?;
        for (i, v) in col.into_iter().enumerate() {
            solved[(i, c)] = v;
        }
    }
    mat_mul(&xs, &solved, Transpose::Yes, Transpose::No)
}

/// `X_Sᵀ X_S` for the columns `S`, the SIS screening matrix.
pub fn marginal_projection(x: &DataMatrix, columns: &[usize]) -> Result<DataMatrix> {
    let xs = x.select_columns(columns);
    mat_mul(&xs, &xs, Transpose::Yes, Transpose::No)
}

/// `mean(diag) / mean(|offdiag|)` of a square matrix.
pub fn dominance_ratio(m: &DataMatrix) -> Result<f64> {
    let (r, c) = m.shape();
    if r != c || r < 2 {
        return Err(Error::invalid("m", format!("need a square matrix of size >= 2, got {r}x{c}")));
    }
    let mut diag = 0.0;
    let mut off = 0.0;
    for i in 0..r {
        for j in 0..c {
            if i == j {
                diag += m[(i, j)];
            } else {
                off += m[(i, j)].abs();
            }
        }
    }
    Ok((diag / r as f64) / (off / (r * (r - 1)) as f64))
}
