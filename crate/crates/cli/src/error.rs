use std::path::PathBuf;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    /// A core failure attributed to the config key that fed it.
    #[error("config `{key}`: {source}")]
    Core { key: String, source: dressq::Error },

    #[error("{0}")]
    Runtime(dressq::Error),
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// 2 for configuration problems, 3 for capacity, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Read { .. } => 2,
            CliError::Write { .. } => 1,
            CliError::Core { source, .. } | CliError::Runtime(source) => match source {
                dressq::Error::Capacity { .. } => 3,
                dressq::Error::InvalidParameter { .. }
                | dressq::Error::IncompatibleChannel { .. }
                | dressq::Error::DimensionMismatch { .. } => 2,
                dressq::Error::Contract(_) | dressq::Error::Numerical(_) => 1,
            },
        }
    }
}

/// Attaches a config key to core errors that do not carry one.
pub(crate) trait KeyContext<T> {
    fn key(self, key: &str) -> CliResult<T>;
}

impl<T> KeyContext<T> for dressq::Result<T> {
    fn key(self, key: &str) -> CliResult<T> {
        self.map_err(|e| match e {
            dressq::Error::InvalidParameter { name, reason } => CliError::Config { key: name, message: reason },
            other => CliError::Core {
                key: key.to_string(),
                source: other,
            },
        })
    }
}
