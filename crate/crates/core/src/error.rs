use thiserror::Error;

/// Errors raised by scenario loading, planning, and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    /// The scenario document violates the schema or an invariant. `path` names the
    /// offending element, e.g. `roadmap.edges[3]`.
    #[error("invalid scenario at `{path}`: {msg}")]
    Config { path: String, msg: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("roadmap construction failed: {0}")]
    Construction(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
