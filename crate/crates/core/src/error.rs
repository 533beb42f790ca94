use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precision of {0} bits is outside the supported range 2..=1048576")]
    InvalidPrecision(u32),

    /// Division by an exact zero.
    #[error("singular scalar operation: division by zero")]
    SingularScalar,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    /// Zero pivot met during pivot-free elimination (1-based index).
    #[error("singular pivot at index {index}")]
    SingularPivot { index: usize },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
