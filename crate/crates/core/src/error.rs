use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not square: row {row} has {len} entries, expected {dim}")]
    NotSquare { row: usize, len: usize, dim: usize },

    #[error("matrix is not positive definite: lambda_min = {min_eigenvalue:e}, lambda_max = {max_eigenvalue:e}")]
    NotPositiveDefinite {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal mass {off_diagonal:e})")]
    EigenNotConverged { sweeps: usize, off_diagonal: f64 },

    #[error("spectral function {function} undefined at eigenvalue {eigenvalue:e}")]
    Domain {
        function: &'static str,
        eigenvalue: f64,
    },

    #[error("negative radicand {0:e} in Wasserstein distance")]
    NegativeRadicand(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("solver produced a non-SPD iterate at step {iteration}: {reason}")]
    Solver { iteration: usize, reason: String },

    #[error("{0}")]
    Input(String),
}
