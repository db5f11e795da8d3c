use thiserror::Error;

/// Errors produced by the numerical kernels and the embedding pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    /// The least-squares solver ran out of iterations. `residual` is the
    /// final relative gradient norm of the offending column.
    #[error(
        "least-squares solve did not converge: column {column} after {iterations} iterations, \
         relative gradient {residual:e}"
    )]
    Convergence {
        column: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("rank error: requested k = {requested}, but only {achievable} directions survive")]
    Rank { requested: usize, achievable: usize },

    #[error("refused: {0}")]
    Refused(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Dimension(msg.into()))
}
