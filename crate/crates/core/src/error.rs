use thiserror::Error;

/// Errors raised by the numerical modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("matrix of dimension {dim} contains non-finite entries")]
    NonFinite { dim: usize },

    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },

    #[error("empty matrix or vector")]
    Empty,

    #[error(
        "matrix is not Hermitian: max |M - M^H| = {deviation:e} exceeds tolerance {tolerance:e}"
    )]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("matrix is not unitary: max |U^H U - I| = {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error(
        "Hermitian eigendecomposition did not converge (dimension {dim}, Frobenius norm {norm_estimate:e})"
    )]
    EigenFailure { dim: usize, norm_estimate: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("time {t} lies outside the domain [0, {t_max}]")]
    OutsideDomain { t: f64, t_max: f64 },

    #[error("operator function evaluation failed at t = {t}: {source}")]
    Evaluation {
        t: f64,
        #[source]
        source: Box<LabError>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
