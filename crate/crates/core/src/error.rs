use thiserror::Error;

/// Errors raised by the numerical pipeline.
///
/// The variants map onto the exit-code classes of the `verify` binary:
/// configuration and domain problems are reported as code 2, everything
/// else surfaces as a failed check.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate matrix: {what} (pivot {pivot:e} at step {step})")]
    Degenerate {
        what: String,
        step: usize,
        pivot: f64,
    },

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("sampler starvation: {0}")]
    Starvation(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn assumption(msg: impl Into<String>) -> Self {
        Error::Assumption(msg.into())
    }

    /// Whether this error belongs to the configuration/domain class.
    pub fn is_config_class(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Domain(_) | Error::Starvation(_) | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
