//! Variable screeners and submodel-selection rules.
//!
//! Every screener maps a design `X` (n x p) and response `Y` to a length-p
//! vector of non-negative importances. The projection family (HOLP,
//! Ridge-HOLP, Divide-HOLP) uses `X^T (X X^T + r I)^{-1} Y`; SIS, RRCS and
//! forward regression are the marginal and greedy competitors.

mod forward;
mod holp;
mod rrcs;
mod select;
mod sis;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Warning};
use crate::matrix::DataMatrix;

pub use forward::forward_regression_rank;
pub use holp::{
    divide_holp_scores, holp_scores, holp_scores_with, ridge_holp_scores, HolpOptions,
    DEFAULT_RIDGE, MIN_BLOCK_ROWS,
};
pub use rrcs::{rrcs_naive, rrcs_omega, rrcs_scores};
pub use select::{rank_select, threshold_select};
pub use sis::{sis_scores, sis_scores_with, SisOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScreenMethod {
    Holp,
    RidgeHolp,
    DivideHolp,
    Sis,
    Rrcs,
    ForwardRegression,
}

/// Parameters a score vector was produced with.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScreenParams {
    pub ridge: Option<f64>,
    pub partitions: Option<usize>,
    pub target_size: Option<usize>,
    pub centered: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreeningScores {
    pub scores: Vec<f64>,
    pub method: ScreenMethod,
    pub params: ScreenParams,
    pub warnings: Vec<Warning>,
}

impl ScreeningScores {
    pub(crate) fn new(scores: Vec<f64>, method: ScreenMethod, params: ScreenParams) -> Self {
        debug_assert!(scores.iter().all(|s| s.is_finite() && *s >= 0.0));
        Self {
            scores,
            method,
            params,
            warnings: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionRule {
    TopD(usize),
    Threshold(f64),
}

/// Selected predictor indices (0-based), most important first.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmodelSelection {
    pub indices: Vec<usize>,
    pub rule: SelectionRule,
}

impl SubmodelSelection {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains_all(&self, support: &[usize]) -> bool {
        support.iter().all(|j| self.indices.contains(j))
    }
}

/// A screening method together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Screener {
    Holp,
    RidgeHolp {
        #[serde(default = "default_ridge")]
        ridge: f64,
    },
    DivideHolp {
        partitions: usize,
    },
    Sis,
    Rrcs,
    #[serde(rename = "fr")]
    ForwardRegression,
}

fn default_ridge() -> f64 {
    DEFAULT_RIDGE
}

impl Screener {
    pub fn method(&self) -> ScreenMethod {
        match self {
            Screener::Holp => ScreenMethod::Holp,
            Screener::RidgeHolp { .. } => ScreenMethod::RidgeHolp,
            Screener::DivideHolp { .. } => ScreenMethod::DivideHolp,
            Screener::Sis => ScreenMethod::Sis,
            Screener::Rrcs => ScreenMethod::Rrcs,
            Screener::ForwardRegression => ScreenMethod::ForwardRegression,
        }
    }

    /// Short label used in reports, e.g. `holp`, `ridge-holp(r=10)`.
    pub fn label(&self) -> String {
        match self {
            Screener::Holp => "holp".into(),
            Screener::RidgeHolp { ridge } => format!("ridge-holp(r={ridge})"),
            Screener::DivideHolp { partitions } => format!("divide-holp(m={partitions})"),
            Screener::Sis => "sis".into(),
            Screener::Rrcs => "rrcs".into(),
            Screener::ForwardRegression => "fr".into(),
        }
    }

    /// Whether the method yields a full score vector (as opposed to only a
    /// selection, like Divide-HOLP).
    pub fn produces_scores(&self) -> bool {
        !matches!(self, Screener::DivideHolp { .. })
    }
}

/// Output of [`run_screener`].
#[derive(Debug, Clone, PartialEq)]
pub enum Screened {
    Scores(ScreeningScores),
    Selection(SubmodelSelection),
}

impl Screened {
    /// Top-`d` submodel. For selection-only methods this truncates the
    /// stored selection.
    pub fn top(&self, d: usize) -> Result<SubmodelSelection> {
        match self {
            Screened::Scores(s) => rank_select(s, d),
            Screened::Selection(sel) => Ok(SubmodelSelection {
                indices: sel.indices.iter().copied().take(d).collect(),
                rule: SelectionRule::TopD(d),
            }),
        }
    }

    pub fn scores(&self) -> Option<&ScreeningScores> {
        match self {
            Screened::Scores(s) => Some(s),
            Screened::Selection(_) => None,
        }
    }
}

/// Runs `screener` with target submodel size `d`.
///
/// `d` only matters for forward regression (clamped to `min(n - 1, p)`) and
/// Divide-HOLP; `shuffle_seed` only for Divide-HOLP's row partition.
pub fn run_screener(
    x: &DataMatrix,
    y: &[f64],
    screener: &Screener,
    d: usize,
    shuffle_seed: u64,
) -> Result<Screened> {
    Ok(match *screener {
        Screener::Holp => Screened::Scores(holp_scores(x, y)?),
        Screener::RidgeHolp { ridge } => Screened::Scores(ridge_holp_scores(x, y, ridge)?),
        Screener::DivideHolp { partitions } => {
            Screened::Selection(divide_holp_scores(x, y, partitions, d, shuffle_seed)?)
        }
        Screener::Sis => Screened::Scores(sis_scores(x, y)?),
        Screener::Rrcs => Screened::Scores(rrcs_scores(x, y)?),
        Screener::ForwardRegression => {
            let cap = x.rows().saturating_sub(1).min(x.cols());
            Screened::Scores(forward_regression_rank(x, y, d.min(cap))?)
        }
    })
}

pub(crate) fn check_response(x: &DataMatrix, y: &[f64]) -> Result<()> {
    if y.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            op: "screen",
            left_rows: x.rows(),
            left_cols: x.cols(),
            right_rows: y.len(),
            right_cols: 1,
        });
    }
    Ok(())
}
