use thiserror::Error;

/// Errors raised by model construction, the rate computations and the CLI front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid index set: {0}")]
    IndexError(String),

    #[error("matrix `{name}` is not positive definite (min eigenvalue {min_eigenvalue:.6e}, max {max_eigenvalue:.6e})")]
    NotPositiveDefinite {
        name: String,
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("matrix `{name}` is not symmetric (max asymmetry {asymmetry:.3e})")]
    NotSymmetric { name: String, asymmetry: f64 },

    #[error("conditioning block is singular: {0}")]
    SingularBlock(String),

    #[error("matrix `{name}` is ill-conditioned (condition number {condition:.3e})")]
    IllConditioned { name: String, condition: f64 },

    #[error("infeasible distortion: D - Sigma_x|yz must be positive definite, min eigenvalue {min_eigenvalue:.6e}")]
    InfeasibleDistortion { min_eigenvalue: f64 },

    #[error("degenerate observation: Sigma_x|z - Sigma_x|yz is not positive definite (min eigenvalue {min_eigenvalue:.6e})")]
    DegenerateObservation { min_eigenvalue: f64 },

    #[error("regime violation: {0}")]
    RegimeViolation(String),

    #[error("structure violation: {0}")]
    StructureViolation(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_)
            | Error::InvalidArgument(_)
            | Error::Io(_)
            | Error::DimensionMismatch(_)
            | Error::IndexError(_)
            | Error::NotPositiveDefinite { .. }
            | Error::NotSymmetric { .. }
            | Error::SingularBlock(_) => 1,
            Error::InfeasibleDistortion { .. }
            | Error::DegenerateObservation { .. }
            | Error::RegimeViolation(_)
            | Error::StructureViolation(_) => 2,
            Error::IllConditioned { .. } | Error::NumericalFailure(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
