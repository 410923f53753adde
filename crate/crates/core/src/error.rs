use thiserror::Error;

/// Errors produced by the stability toolkit.
///
/// Every variant maps to a stable machine-readable code (see [`Error::code`])
/// which is what reports and the CLI expose.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid M = {value}: {reason}")]
    InvalidM { value: String, reason: &'static str },

    #[error("invalid lambda = {value}: lambda must be a nonzero integer")]
    InvalidLambda { value: i64 },

    /// The coefficient series diverges for the reduced parameters.
    #[error("condition violated: {what} (|u|^beta = {u_term}, |v|^beta = {v_term})")]
    ConditionViolation {
        what: String,
        u_term: f64,
        v_term: f64,
    },

    #[error("iteration did not reach the envelope tolerance {tol:e} within {n_max} steps (envelope {envelope:e})")]
    NonConvergence { n_max: usize, tol: f64, envelope: f64 },

    #[error("codomain value overflowed at step {step}")]
    Overflow { step: usize },

    #[error("could not parse {what}: {input}")]
    Parse { what: &'static str, input: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Machine-readable error code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::InvalidM { .. } => "invalid-M",
            Error::InvalidLambda { .. } => "invalid-argument",
            Error::ConditionViolation { .. } => "condition-violation",
            Error::NonConvergence { .. } => "non-convergence",
            Error::Overflow { .. } => "overflow",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    /// Whether the error stems from invalid input parameters (CLI exit code 2)
    /// rather than a failed run.
    pub fn is_invalid_parameters(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::DimensionMismatch { .. }
                | Error::InvalidM { .. }
                | Error::InvalidLambda { .. }
                | Error::ConditionViolation { .. }
                | Error::Parse { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
