//! Rank-correlation screening.
//!
//! `omega_j = #{(i, l) : x_ij < x_lj and y_i < y_l} / (n (n - 1))` counts
//! strictly concordant ordered pairs, and the score is `|omega_j - 1/4|`.
//! Pairs tied in either coordinate never count. The count is done per
//! column in `O(n log n)` by sweeping observations in increasing `y` and
//! querying a Fenwick tree over the ranks of `x`.

use super::{check_response, ScreenMethod, ScreenParams, ScreeningScores};
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

pub fn rrcs_scores(x: &DataMatrix, y: &[f64]) -> Result<ScreeningScores> {
    check_response(x, y)?;
    let n = x.rows();
    if n < 2 {
        return Err(Error::invalid("n", "rank correlation needs at least two observations"));
    }
    let groups = y_groups(y);
    let mut col = vec![0.0; n];
    let mut fenwick = Fenwick::new(n);
    let scores = (0..x.cols())
        .map(|j| {
            for (i, c) in col.iter_mut().enumerate() {
                *c = x[(i, j)];
            }
            let omega = omega_from_groups(&col, &groups, &mut fenwick);
            (omega - 0.25).abs()
        })
        .collect();
    Ok(ScreeningScores::new(scores, ScreenMethod::Rrcs, ScreenParams::default()))
}

/// `omega` for a single column.
pub fn rrcs_omega(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let mut fenwick = Fenwick::new(x.len());
    omega_from_groups(x, &y_groups(y), &mut fenwick)
}

/// Brute-force pair enumeration; the reference for [`rrcs_omega`].
pub fn rrcs_naive(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut count = 0u64;
    for i in 0..n {
        for l in 0..n {
            if i != l && x[i] < x[l] && y[i] < y[l] {
                count += 1;
            }
        }
    }
    count as f64 / (n as f64 * (n as f64 - 1.0))
}

/// Observation indices sorted by `y`, split into runs of equal `y`.
fn y_groups(y: &[f64]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match groups.last_mut() {
            Some(g) if y[g[0]] == y[i] => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

fn omega_from_groups(x: &[f64], groups: &[Vec<usize>], fenwick: &mut Fenwick) -> f64 {
    let n = x.len();
    // Dense ranks of x, equal values share a rank.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut rank = vec![0usize; n];
    let mut r = 0;
    for k in 0..n {
        if k > 0 && x[order[k]] != x[order[k - 1]] {
            r += 1;
        }
        rank[order[k]] = r;
    }

    fenwick.clear(r + 1);
    let mut concordant = 0u64;
    for g in groups {
        for &i in g {
            concordant += fenwick.prefix(rank[i]);
        }
        for &i in g {
            fenwick.add(rank[i]);
        }
    }
    concordant as f64 / (n as f64 * (n as f64 - 1.0))
}

struct Fenwick {
    tree: Vec<u64>,
    len: usize,
}

impl Fenwick {
    fn new(cap: usize) -> Self {
        Self {
            tree: vec![0; cap + 1],
            len: cap,
        }
    }

    fn clear(&mut self, len: usize) {
        self.len = len;
        self.tree[..=len].fill(0);
    }

    fn add(&mut self, pos: usize) {
        let mut i = pos + 1;
        while i <= self.len {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Number of inserted positions strictly below `pos`.
    fn prefix(&self, pos: usize) -> u64 {
        let mut i = pos;
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}
