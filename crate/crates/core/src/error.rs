use thiserror::Error;

/// Errors raised by the algebra, simulation and construction routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CaqcError {
    #[error("dimension mismatch: expected {expected} qubits, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("invalid CQCA rule: {0}")]
    Validation(String),

    #[error("period not found within {cap} steps on a ring of {n} qubits")]
    PeriodNotFound { n: usize, cap: usize },

    #[error("no decomposition T^2(Z) = Z * prod (T(Z_-k) T(Z_k))^a * T(Z)^b with m <= {max_m}")]
    Decomposition { max_m: usize },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("generator is not Hermitian: {0}")]
    NonHermitian(String),

    #[error("index {index} out of range for {n} qubits")]
    Index { index: usize, n: usize },

    #[error("state size cap exceeded: {n} qubits > {cap}")]
    Cap { n: usize, cap: usize },

    #[error("impossible measurement outcome (probability {probability:e})")]
    ImpossibleOutcome { probability: f64 },

    #[error("invalid stabilizer code: {0}")]
    InvalidCode(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("degenerate dataset: label standard deviation {0:e}")]
    DegenerateDataset(f64),

    #[error("training diverged: {0}")]
    NonFinite(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CaqcError {
    fn from(e: std::io::Error) -> Self {
        CaqcError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CaqcError>;
