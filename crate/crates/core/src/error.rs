use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors surfaced by pipeline stages.
///
/// Soft failures (unparseable C++ files, failed builds, failing tests) are
/// recorded as data in the stage outputs and never show up here.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("invalid JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Lcov(#[from] crate::coverage::LcovError),

    #[error(transparent)]
    Cmake(#[from] crate::integration::CmakeError),

    #[error(transparent)]
    Gateway(#[from] crate::llm::GatewayError),

    #[error(transparent)]
    Harness(#[from] crate::harness::HarnessError),

    #[error("unknown module `{0}`")]
    UnknownModule(String),

    #[error("unknown grouping `{0}` (expected `module` or `package`)")]
    UnknownGrouping(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing pipeline state: {0} (run the earlier stage first)")]
    MissingState(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
