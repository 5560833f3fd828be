use thiserror::Error;

/// Errors raised by the measurement and reconstruction pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cannot normalize: {0}")]
    Normalization(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    Unitarity { deviation: f64 },
    #[error("tensor is not Hermitian (max deviation {deviation:.3e})")]
    Symmetry { deviation: f64 },
    #[error("{what} out of range: {detail}")]
    Range { what: &'static str, detail: String },
    #[error("records do not match the measurement plan: {0}")]
    PlanMismatch(String),
    #[error("singular linear system for weight m = {m}")]
    SingularSystem { m: usize },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid record: {0}")]
    InvalidRecord(String),
}

pub type Result<T> = std::result::Result<T, Error>;
