use thiserror::Error;

/// Errors raised anywhere in the invariant pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("expression has no variables and no explicit dimension")]
    ZeroDimension,

    #[error("dimension {0} is not supported (expected 1..={max})", max = crate::jet::MAX_DIM)]
    UnsupportedDimension(usize),

    #[error("variable x{index} is outside dimension {dim}")]
    VariableOutOfRange { index: usize, dim: usize },

    #[error("point has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("domain violation in `{expr}`: {reason}")]
    Domain { expr: String, reason: String },

    #[error("jet order {got} is unsupported or too low (need {required})")]
    JetOrder { got: usize, required: usize },

    #[error("metric is not positive definite (smallest eigenvalue ~ {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("the Pick invariant is undefined for n = 1")]
    PickUndefined,

    #[error("matrix {index} is not symmetric (asymmetry {residual:e})")]
    NotSymmetric { index: usize, residual: f64 },

    #[error("matrices {i} and {j} do not commute (relative commutator {residual:e})")]
    NonCommuting { i: usize, j: usize, residual: f64 },

    #[error("{what} did not converge: {detail}")]
    Convergence { what: &'static str, detail: String },

    #[error("spectrum {spectrum:?} fits no case pattern")]
    PatternMismatch { spectrum: Vec<f64> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("linear block of the affine map is singular")]
    SingularMap,

    #[error("{steps} steps are too few (error estimate {estimate:e})")]
    TooFewSteps { steps: usize, estimate: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
