use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Physics precondition on the system size or parameters.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(
        "ground state is exactly degenerate for N = {n} (N = 2 mod 4); \
         only N multiple of 4 is supported"
    )]
    Degenerate { n: usize },

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e}, target {tol:.1e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        tol: f64,
    },

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("basis mismatch: expected {expected}, found {found}")]
    BasisMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("checkpoint format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
