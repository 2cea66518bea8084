use std::path::PathBuf;

/// Errors surfaced by the simulator, the learner and the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent.
    #[error("invalid configuration `{key}`: {message}")]
    Config { key: String, message: String },

    /// Mismatched lengths or shapes between values that must agree.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// An operation was attempted in the wrong lifecycle state.
    #[error("invalid state: {0}")]
    State(String),

    /// The caller asked for something the inputs cannot provide.
    #[error("usage error: {0}")]
    Usage(String),

    /// A file or byte stream could not be decoded.
    #[error("malformed {what}: {message}")]
    Format { what: &'static str, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn format(what: &'static str, message: impl Into<String>) -> Self {
        Error::Format {
            what,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 for configuration problems, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
