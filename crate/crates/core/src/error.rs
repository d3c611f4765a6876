//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by the numerical routines and the command-line front end.
#[derive(Debug, Error)]
pub enum StarkError {
    /// Input data (potential descriptor, grid, flag value) is malformed.
    #[error("malformed input: {0}")]
    MalformedInput(String),
    /// The argument lies outside the supported domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A linear-scale value would overflow; the log-scaled variant must be used.
    #[error("overflow risk: {0}")]
    Overflow(String),
    /// An iterative or adaptive procedure did not reach its tolerance.
    #[error("no convergence: {0}")]
    NonConvergence(String),
    /// Successive quadrature refinements disagree beyond tolerance.
    #[error("under-resolved discretisation: {0}")]
    UnderResolved(String),
    /// A branch of a logarithm could not be tracked continuously.
    #[error("branch jump: {0}")]
    BranchJump(String),
    /// A matrix that must be invertible is numerically singular.
    #[error("singular operator: {0}")]
    Singular(String),
    /// A zero lies on (or too close to) an integration contour.
    #[error("zero on contour: {0}")]
    ZeroOnContour(String),
    /// A completeness or consistency certificate could not be established.
    #[error("certification failure: {0}")]
    Certification(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl StarkError {
    /// Process exit code used by the command-line front end.
    ///
    /// 2 = malformed input, 3 = numerical non-convergence, 4 = certification failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            StarkError::MalformedInput(_) | StarkError::Json(_) | StarkError::Domain(_) => 2,
            StarkError::Certification(_) => 4,
            StarkError::Io(_) => 1,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, StarkError>;
