use serde::{Deserialize, Serialize};

use crate::modelselect::FitResult;
use crate::simgen::SimDataset;

/// Per-replicate selection quality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionMetrics {
    pub false_negatives: usize,
    pub false_positives: usize,
    /// No false negatives.
    pub covered: bool,
    /// Covered with no false positives.
    pub exact: bool,
    pub size: usize,
    /// `‖β̂ - β‖₂`, absent when no fit was supplied.
    pub l2_error: Option<f64>,
    pub wall_time_s: f64,
}

/// Compares a selected set (and optionally its fit) with the truth.
///
/// `wall_time_s` is left at 0 for the caller to fill in.
pub fn score_selection(selected: &[usize], fit: Option<&FitResult>, truth: &SimDataset) -> SelectionMetrics {
    let p = truth.p();
    let mut chosen = vec![false; p];
    for &j in selected {
        chosen[j] = true;
    }
    let size = chosen.iter().filter(|&&c| c).count();
    let hits = truth.support.iter().filter(|&&j| chosen[j]).count();
    let false_negatives = truth.support.len() - hits;
    let false_positives = size - hits;
    let l2_error = fit.map(|f| {
        let mut diff = f.dense_coefficients(p);
        for (&j, &b) in truth.support.iter().zip(&truth.beta) {
            diff[j] -= b;
        }
        diff.iter().map(|d| d * d).sum::<f64>().sqrt()
    });
    SelectionMetrics {
        false_negatives,
        false_positives,
        covered: false_negatives == 0,
        exact: false_negatives == 0 && false_positives == 0,
        size,
        l2_error,
        wall_time_s: 0.0,
    }
}
