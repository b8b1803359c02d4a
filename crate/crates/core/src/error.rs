use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter was outside its admissible domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Vector or image dimensions do not match what the operation expects.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A numerical routine failed to meet its accuracy contract.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An iterative solver hit its iteration budget without converging.
    #[error("did not converge: {0}")]
    NonConvergence(String),

    /// Input samples are degenerate (e.g. all equal).
    #[error("degenerate samples: {0}")]
    DegenerateSamples(String),

    /// Image file could not be parsed or written.
    #[error("image format: {0}")]
    ImageFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
