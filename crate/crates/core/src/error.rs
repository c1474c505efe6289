use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an operation's inputs was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A kernel evaluation produced a non-finite value.
    #[error("kernel evaluation produced a non-finite value at label pair ({row}, {col})")]
    NonFiniteKernel { row: usize, col: usize },

    /// An eigensolve or other numerical routine failed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A trajectory left the finite domain.
    #[error("trajectory diverged at t = {t}: state is non-finite")]
    Diverged { t: f64 },

    /// Coherent-vector construction leaked past the truncation.
    #[error(
        "truncation too small: top-level occupation {occupation:.3e} exceeds {limit:.3e}; \
         increase the basis dimension"
    )]
    Truncation { occupation: f64, limit: f64 },

    /// An iterative eigensolver failed to reach its residual target.
    #[error(
        "iterative solver did not converge: residual {residual:.3e} after {iterations} \
         iterations (restart residuals: {history:?})"
    )]
    NoConvergence {
        residual: f64,
        iterations: usize,
        history: Vec<f64>,
    },

    /// Configuration file failure with the offending field path.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
