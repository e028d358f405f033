use thiserror::Error;

/// Errors raised by model construction, spectral analysis and dynamics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// A quantity is not defined at this parameter point, typically because
    /// a dressed state cannot be assigned to its bare label.
    #[error("ill-defined at this parameter point: {message}")]
    IllDefined {
        message: String,
        /// `(label, overlap)` pairs of the offending states.
        overlaps: Vec<(String, f64)>,
    },

    #[error("singular parameter: {0}")]
    SingularParameter(String),

    #[error("integrator failure: {0}")]
    IntegratorFailure(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn ill_defined(message: impl Into<String>, overlaps: Vec<(String, f64)>) -> Self {
        Error::IllDefined {
            message: message.into(),
            overlaps,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
