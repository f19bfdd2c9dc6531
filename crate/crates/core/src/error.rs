use thiserror::Error;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LabError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch in {op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },

    #[error("{op} requires a square matrix, got {rows}x{cols}")]
    NotSquare { op: &'static str, rows: usize, cols: usize },

    #[error("singular value decomposition did not converge")]
    SvdFailed,

    /// Two characterizations of the same class disagreed; the payload lists
    /// every route with its verdict and residual.
    #[error("route disagreement in {predicate}: {routes}")]
    RouteDisagreement { predicate: String, routes: String },

    #[error("profile consistency violation: {0}")]
    Consistency(String),

    #[error("generator {family} gave up after {attempts} degenerate draws")]
    GeneratorExhausted { family: String, attempts: usize },
}

impl LabError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        LabError::InvalidInput(msg.into())
    }

    pub(crate) fn shape(op: &'static str, detail: impl Into<String>) -> Self {
        LabError::ShapeMismatch { op, detail: detail.into() }
    }

    /// True for failures that come from numerical self-checks rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, LabError::RouteDisagreement { .. } | LabError::Consistency(_))
    }
}
