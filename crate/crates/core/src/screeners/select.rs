use std::cmp::Ordering;

use super::{ScreeningScores, SelectionRule, SubmodelSelection};
use crate::error::{Error, Result};

/// Descending score, then ascending index.
fn by_importance(scores: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b))
}

/// Indices of the `d` largest scores, ties to the lower index.
///
/// Zero scores are never selected, so the result holds
/// `min(d, #positive scores)` indices.
pub fn rank_select(scores: &ScreeningScores, d: usize) -> Result<SubmodelSelection> {
    let p = scores.len();
    if d == 0 || d > p {
        return Err(Error::invalid("d", format!("must lie in 1..={p}, got {d}")));
    }
    let s = &scores.scores;
    let mut idx: Vec<usize> = (0..p).filter(|&j| s[j] > 0.0).collect();
    let cmp = by_importance(s);
    if idx.len() > d {
        idx.select_nth_unstable_by(d - 1, &cmp);
        idx.truncate(d);
    }
    idx.sort_unstable_by(&cmp);
    Ok(SubmodelSelection {
        indices: idx,
        rule: SelectionRule::TopD(d),
    })
}

/// All indices with score `>= gamma`, most important first.
pub fn threshold_select(scores: &ScreeningScores, gamma: f64) -> Result<SubmodelSelection> {
    if !(gamma >= 0.0) {
        return Err(Error::invalid("gamma", format!("must be non-negative, got {gamma}")));
    }
    let s = &scores.scores;
    let mut idx: Vec<usize> = (0..s.len()).filter(|&j| s[j] >= gamma).collect();
    idx.sort_unstable_by(by_importance(s));
    Ok(SubmodelSelection {
        indices: idx,
        rule: SelectionRule::Threshold(gamma),
    })
}
