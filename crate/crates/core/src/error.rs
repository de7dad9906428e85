use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    DimensionMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("data of length {len} cannot form a {rows}x{cols} matrix")]
    Shape { rows: usize, cols: usize, len: usize },

    #[error("non-finite entry at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error(
        "matrix is not positive definite: pivot {pivot} is {value:e}. \
         A singular Gram matrix XX^T means p <= n or duplicated rows; \
         use ridge_holp_scores (method `ridge-holp`) instead"
    )]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("HOLP needs more predictors than observations, got n = {n}, p = {p}; use ridge_holp_scores for p <= n")]
    DegenerateRegime { n: usize, p: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("SVD failed to converge after {sweeps} sweeps")]
    SvdNoConvergence { sweeps: usize },

    #[error("coordinate descent failed to converge at lambda index {lambda_index} after {sweeps} sweeps")]
    LassoNoConvergence { lambda_index: usize, sweeps: usize },

    #[error("design is rank deficient: column {column} is linearly dependent on the columns before it")]
    RankDeficient { column: usize },

    #[error("residual sum of squares must be positive, got {rss:e}")]
    NonPositiveRss { rss: f64 },

    #[error("block {block}: {source}")]
    Block {
        block: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{stage} stage: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("replicate {index}: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn in_stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |e| Error::Stage {
            stage,
            source: Box::new(e),
        }
    }

    /// Strips stage/replicate/block wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Block { source, .. }
            | Error::Stage { source, .. }
            | Error::Replicate { source, .. } => source.root(),
            other => other,
        }
    }
}

/// Non-fatal conditions recorded alongside results.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Warning {
    ZeroVarianceColumn { column: usize },
    SkippedSubmodelSize { size: usize, reason: String },
    EmptySupport,
    SkippedFold { fold: usize, reason: String },
    SkippedLambda { index: usize, reason: String },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::ZeroVarianceColumn { column } => {
                write!(f, "column {column} has zero variance; score set to 0")
            }
            Warning::SkippedSubmodelSize { size, reason } => {
                write!(f, "submodel size {size} skipped: {reason}")
            }
            Warning::EmptySupport => write!(f, "true support is empty"),
            Warning::SkippedFold { fold, reason } => write!(f, "fold {fold} skipped: {reason}"),
            Warning::SkippedLambda { index, reason } => {
                write!(f, "lambda index {index} skipped: {reason}")
            }
        }
    }
}
