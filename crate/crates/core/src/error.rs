use thiserror::Error;

/// Errors raised by the simulation and analysis kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not one (got {0})")]
    InvalidTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("non-finite matrix entry")]
    NonFinite,

    #[error("dimension {0} is not a power of two")]
    NotQubitSpace(usize),

    #[error("invalid subsystem index {index} for {qubits} qubits")]
    InvalidSubsystem { index: usize, qubits: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty evolution grid")]
    EmptyGrid,

    #[error("degenerate fit data: {0}")]
    DegenerateData(String),

    #[error("fit did not converge after {0} iterations")]
    NotConverged(usize),

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    #[error("eigensolver did not converge")]
    EigenNoConvergence,
}

pub type Result<T> = std::result::Result<T, Error>;
