use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("register must contain at least one site")]
    EmptyRegister,
    #[error("index {index} out of range for site {site} with dimension {dim}")]
    IndexOutOfRange { site: usize, index: usize, dim: usize },
    #[error("dense representation needs {requested} entries, cap is {cap}")]
    DenseCapExceeded { requested: usize, cap: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix is singular or numerically singular")]
    SingularMatrix,
    #[error("tensor has zero norm")]
    ZeroNorm,
    #[error("qubit position {position} outside [1, {n}]")]
    BadPosition { position: usize, n: usize },
    #[error("qubit positions overlap: {0:?}")]
    OverlappingPositions(Vec<usize>),
    #[error("unknown named state `{0}`")]
    UnknownState(String),
    #[error("unsupported Shor instance a={a}, M={m}: {reason}")]
    UnsupportedShor { a: u64, m: u64, reason: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("conditional probability {value:e} below tolerance at site {site}")]
    NegativeProbability { site: usize, value: f64 },
    #[error("postselected outcome has probability {0:e}")]
    ZeroProbabilityPostselection(f64),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("serialization failed: {0}")]
    Serialization(String),
}

impl Error {
    /// True for failures caused by floating-point breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularMatrix | Error::NegativeProbability { .. } | Error::Numerical(_)
        )
    }
}
