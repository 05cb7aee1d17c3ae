use std::path::{Path, PathBuf};

/// Errors raised anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} at `{location}`: {message}")]
    Parse {
        path: PathBuf,
        location: String,
        message: String,
    },

    #[error("validation error in {path}: {message}")]
    Validation { path: PathBuf, message: String },

    #[error("lexicon error: {0}")]
    Lexicon(String),

    #[error("unknown split name `{0}` (expected confident, human or nature)")]
    UnknownSplit(String),

    #[error("candidate captions reference image ids absent from the corpus: {0:?}")]
    UnknownCandidateIds(Vec<u64>),

    #[error("no evaluation pairs: {0}")]
    EmptyPairs(String),

    #[error("confident split is empty; gender accuracy is undefined")]
    EmptyConfidentSplit,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn validation(path: &Path, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}
