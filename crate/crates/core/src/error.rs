use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A function was evaluated outside the set where it is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate domain: rejection sampling accepted {accepted} of {attempts} proposals")]
    DegenerateDomain { accepted: usize, attempts: usize },

    #[error("empty set: {0}")]
    Empty(String),

    #[error("vertex {vertex} is not connected to {target}")]
    Disconnected { vertex: usize, target: &'static str },

    #[error("vertex {0} has no neighbors")]
    IsolatedVertex(usize),

    #[error("malformed input {path:?}: {reason}")]
    Format { path: Option<PathBuf>, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
