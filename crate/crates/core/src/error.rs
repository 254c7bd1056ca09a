use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Requested Hilbert-space dimension exceeds the configured maximum.
    #[error("capacity exceeded: dimension {requested} > max {max}")]
    Capacity { requested: usize, max: usize },

    /// An operator or state violated a structural invariant (Hermiticity,
    /// unitarity, normalization, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A user-facing parameter is out of range. `name` is the parameter key.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("channel `{channel}` is incompatible with model family `{family}`")]
    IncompatibleChannel {
        channel: &'static str,
        family: &'static str,
    },
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}
