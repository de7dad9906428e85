//! Dense row-major matrices and the products the screeners are built on.
//!
//! Everything here is sized for designs with a few hundred rows and up to
//! ~10^6 columns, so the kernels never materialise a transpose: `mat_mul`
//! takes transpose flags and `gram_rows` streams the rows of `X` once per
//! row tile.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DataMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape {
                rows,
                cols,
                len: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Like [`DataMatrix::new`] but also rejects NaN and infinite entries.
    pub fn new_finite(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        let m = Self::new(rows, cols, data)?;
        if let Some(pos) = m.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    op: "from_rows",
                    left_rows: 1,
                    left_cols: cols,
                    right_rows: i,
                    right_cols: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Column vector from a slice.
    pub fn column_vector(v: &[f64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// Columns in the given order, as a new `rows x idx.len()` matrix.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for i in 0..self.rows {
            let r = self.row(i);
            data.extend(idx.iter().map(|&j| r[j]));
        }
        Self {
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.cols * idx.len());
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    /// Largest absolute entry (0 for an empty matrix).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `X v` for a vector of length `cols`.
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(self.mismatch("mul_vec", v.len(), 1));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    /// `X^T v` for a vector of length `rows`, accumulated row by row so the
    /// matrix is read contiguously.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            return Err(self.mismatch("tr_mul_vec", v.len(), 1));
        }
        let mut out = vec![0.0; self.cols];
        for (i, &w) in v.iter().enumerate() {
            axpy(w, self.row(i), &mut out);
        }
        Ok(out)
    }

    /// Adds `r` to every diagonal entry.
    pub fn add_diagonal(&mut self, r: f64) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self.data[i * self.cols + i] += r;
        }
    }

    pub fn sub(&self, other: &DataMatrix) -> Result<DataMatrix> {
        if self.shape() != other.shape() {
            return Err(self.mismatch("sub", other.rows, other.cols));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(DataMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    fn mismatch(&self, op: &'static str, rows: usize, cols: usize) -> Error {
        Error::DimensionMismatch {
            op,
            left_rows: self.rows,
            left_cols: self.cols,
            right_rows: rows,
            right_cols: cols,
        }
    }
}

impl Index<(usize, usize)> for DataMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DataMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transpose {
    No,
    Yes,
}

/// `op(A) * op(B)` where `op` optionally transposes.
pub fn mat_mul(a: &DataMatrix, b: &DataMatrix, ta: Transpose, tb: Transpose) -> Result<DataMatrix> {
    let (m, ka) = match ta {
        Transpose::No => (a.rows, a.cols),
        Transpose::Yes => (a.cols, a.rows),
    };
    let (kb, n) = match tb {
        Transpose::No => (b.rows, b.cols),
        Transpose::Yes => (b.cols, b.rows),
    };
    if ka != kb {
        return Err(Error::DimensionMismatch {
            op: "mat_mul",
            left_rows: m,
            left_cols: ka,
            right_rows: kb,
            right_cols: n,
        });
    }
    let mut c = DataMatrix::zeros(m, n);
    match (ta, tb) {
        (Transpose::No, Transpose::No) => {
            for i in 0..m {
                let ci = &mut c.data[i * n..(i + 1) * n];
                for (k, &aik) in a.row(i).iter().enumerate() {
                    axpy(aik, b.row(k), ci);
                }
            }
        }
        (Transpose::No, Transpose::Yes) => {
            for i in 0..m {
                let ai = a.row(i);
                for j in 0..n {
                    c.data[i * n + j] = dot(ai, b.row(j));
                }
            }
        }
        (Transpose::Yes, Transpose::No) => {
            for k in 0..ka {
                let ak = a.row(k);
                let bk = b.row(k);
                for (i, &aki) in ak.iter().enumerate() {
                    axpy(aki, bk, &mut c.data[i * n..(i + 1) * n]);
                }
            }
        }
        (Transpose::Yes, Transpose::Yes) => {
            for i in 0..m {
                for j in 0..n {
                    let mut s = 0.0;
                    for k in 0..ka {
                        s += a.data[k * a.cols + i] * b.data[j * b.cols + k];
                    }
                    c.data[i * n + j] = s;
                }
            }
        }
    }
    Ok(c)
}

const ROW_TILE: usize = 4;

/// `X X^T`, exactly symmetric.
///
/// Rows are processed in 4x4 tiles so each pass over a tile of rows feeds
/// sixteen dot products. Only the upper triangle is computed; the lower one
/// is mirrored, which is the exact symmetrisation.
pub fn gram_rows(x: &DataMatrix) -> DataMatrix {
    let n = x.rows;
    let mut g = DataMatrix::zeros(n, n);
    let mut i0 = 0;
    while i0 < n {
        let ih = (i0 + ROW_TILE).min(n);
        let mut j0 = i0;
        while j0 < n {
            let jh = (j0 + ROW_TILE).min(n);
            if ih - i0 == ROW_TILE && jh - j0 == ROW_TILE {
                let t = dot_tile(
                    [x.row(i0), x.row(i0 + 1), x.row(i0 + 2), x.row(i0 + 3)],
                    [x.row(j0), x.row(j0 + 1), x.row(j0 + 2), x.row(j0 + 3)],
                );
                for (a, ta) in t.iter().enumerate() {
                    for (b, &v) in ta.iter().enumerate() {
                        g.data[(i0 + a) * n + j0 + b] = v;
                    }
                }
            } else {
                for i in i0..ih {
                    for j in j0..jh {
                        g.data[i * n + j] = dot(x.row(i), x.row(j));
                    }
                }
            }
            j0 = jh;
        }
        i0 = ih;
    }
    for i in 0..n {
        for j in 0..i {
            g.data[i * n + j] = g.data[j * n + i];
        }
    }
    g
}

#[inline]
fn dot_tile(a: [&[f64]; 4], b: [&[f64]; 4]) -> [[f64; 4]; 4] {
    const LANES: usize = 2;
    let len = a[0].len();
    let body = len - len % LANES;
    let mut acc = [[[0.0f64; LANES]; 4]; 4];
    let mut k = 0;
    while k < body {
        let av: [[f64; LANES]; 4] =
            std::array::from_fn(|r| std::array::from_fn(|l| a[r][k + l]));
        let bv: [[f64; LANES]; 4] =
            std::array::from_fn(|r| std::array::from_fn(|l| b[r][k + l]));
        for r in 0..4 {
            for s in 0..4 {
                for l in 0..LANES {
                    acc[r][s][l] += av[r][l] * bv[s][l];
                }
            }
        }
        k += LANES;
    }
    let mut out = [[0.0; 4]; 4];
    for r in 0..4 {
        for s in 0..4 {
            let mut v: f64 = acc[r][s].iter().sum();
            for kk in body..len {
                v += a[r][kk] * b[s][kk];
            }
            out[r][s] = v;
        }
    }
    out
}

/// Dot product with four independent accumulators.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> DataMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DataMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    fn naive(a: &DataMatrix, b: &DataMatrix, ta: bool, tb: bool) -> DataMatrix {
        let get = |m: &DataMatrix, t: bool, i: usize, j: usize| if t { m[(j, i)] } else { m[(i, j)] };
        let (m, k) = if ta { (a.cols(), a.rows()) } else { (a.rows(), a.cols()) };
        let n = if tb { b.rows() } else { b.cols() };
        DataMatrix::from_fn(m, n, |i, j| (0..k).map(|l| get(a, ta, i, l) * get(b, tb, l, j)).sum())
    }

    fn max_diff(a: &DataMatrix, b: &DataMatrix) -> f64 {
        a.sub(b).unwrap().max_abs()
    }

    #[test]
    fn identity_times_a() {
        let a = random(3, 4, 1);
        let c = mat_mul(&DataMatrix::identity(3), &a, Transpose::No, Transpose::No).unwrap();
        assert_eq!(c, a);
    }

    #[test]
    fn small_hand_product() {
        let a = DataMatrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        let b = DataMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap();
        let c = mat_mul(&a, &b, Transpose::No, Transpose::No).unwrap();
        assert_eq!(c, DataMatrix::from_rows(&[[4.0, 5.0], [10.0, 11.0]]).unwrap());
    }

    #[test]
    fn all_transpose_combinations_match_naive() {
        for (ta, tb) in [(false, false), (false, true), (true, false), (true, true)] {
            let a = if ta { random(5, 7, 2) } else { random(7, 5, 2) };
            let b = if tb { random(3, 5, 3) } else { random(5, 3, 3) };
            let flag = |t| if t { Transpose::Yes } else { Transpose::No };
            let c = mat_mul(&a, &b, flag(ta), flag(tb)).unwrap();
            assert!(max_diff(&c, &naive(&a, &b, ta, tb)) < 1e-12);
        }
    }

    #[test]
    fn ata_is_symmetric() {
        let a = random(7, 5, 4);
        let ata = mat_mul(&a, &a, Transpose::Yes, Transpose::No).unwrap();
        assert!(max_diff(&ata, &ata.transpose()) <= 1e-12);
        assert!(max_diff(&ata, &naive(&a, &a, true, false)) <= 1e-12);
    }

    #[test]
    fn mismatch_names_both_shapes() {
        let a = random(2, 3, 5);
        let err = mat_mul(&a, &a, Transpose::No, Transpose::No).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("2x3"), "{text}");
    }

    #[test]
    fn gram_hand_example() {
        let x = DataMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(gram_rows(&x), DataMatrix::from_rows(&[[5.0, 11.0], [11.0, 25.0]]).unwrap());
    }

    #[test]
    fn gram_of_orthonormal_rows_is_identity() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x = DataMatrix::from_rows(&[[s, s, 0.0], [s, -s, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        let g = gram_rows(&x);
        assert!(max_diff(&g, &DataMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn gram_matches_mat_mul() {
        for (n, p) in [(10, 200), (9, 33), (4, 4), (13, 1)] {
            let x = random(n, p, 6);
            let g = gram_rows(&x);
            let r = mat_mul(&x, &x, Transpose::No, Transpose::Yes).unwrap();
            assert!(max_diff(&g, &r) <= 1e-12, "{n}x{p}");
            assert_eq!(g, g.transpose());
        }
    }

    #[test]
    fn new_finite_rejects_nan() {
        let err = DataMatrix::new_finite(2, 2, vec![1.0, 2.0, f64::NAN, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 1, col: 0 }));
        assert!(DataMatrix::new(2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn tr_mul_vec_matches_transpose() {
        let x = random(6, 11, 7);
        let v: Vec<f64> = (0..6).map(|i| i as f64 - 2.5).collect();
        let a = x.tr_mul_vec(&v).unwrap();
        let b = x.transpose().mul_vec(&v).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() < 1e-12);
        }
    }
}
