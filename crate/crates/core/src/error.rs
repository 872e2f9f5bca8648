use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested evaluation lies outside the range where accuracy is validated.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("adaptive quadrature did not converge: achieved error estimate {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    /// Factorization hit a (numerically) singular pivot.
    #[error("singular matrix in block {block}")]
    Singular { block: usize },

    #[error("convolution weights cover {available} steps, step {requested} requested")]
    WeightsTooShort { available: usize, requested: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("solver failure in run {row}: {source}")]
    Solver { row: usize, source: Box<Error> },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
