use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("register size mismatch: expected {expected} qubits, got {got}")]
    QubitMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operator is not Hermitian (term {term} has coefficient {re} + {im}i)")]
    NotHermitian { term: usize, re: f64, im: f64 },

    #[error("dense form requested for {n} qubits, above the oracle cap of {cap}")]
    OracleCap { n: usize, cap: usize },

    #[error("{what} did not converge within {limit} restarts")]
    NoConvergence { what: &'static str, limit: usize },

    #[error("overlap regularization retained no directions (largest overlap eigenvalue {largest:e})")]
    RankZero { largest: f64 },

    #[error("all {0} computational basis states are excluded")]
    AllExcluded(usize),

    #[error("residue quadratic form is negative ({0:e}); subspace matrices are inconsistent")]
    NegativeResidue(f64),

    #[error("observable expectation has imaginary part {0:e}")]
    ComplexExpectation(f64),

    #[error("invalid Pauli string {0:?}")]
    ParsePauli(String),

    #[error("invalid bitstring {0:?}")]
    ParseBitstring(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
