use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("structure violated: {0}")]
    Structure(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A table-backed map was queried at a point it has no entry for.
    #[error("missing sample: no table entry matches {0}")]
    MissingSample(String),

    /// The map does not have the canonical form being recovered.
    #[error("not a preserver: {0}")]
    NotAPreserver(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("internal error: {0}")]
    Internal(String),

    /// Invalid map specification; `path` locates the offending field.
    #[error("spec error at `{path}`: {message}")]
    Spec { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn spec(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Spec {
            path: path.into(),
            message: message.into(),
        }
    }
}
