use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {message}")]
    Ingestion { path: PathBuf, message: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate image_id {0:?}")]
    DuplicateId(String),

    #[error("record {index} is missing field {field:?}")]
    MissingField { index: usize, field: &'static str },

    #[error("caption for {0:?} is empty")]
    EmptyCaption(String),

    #[error("no references for candidate ids: {}", .0.join(", "))]
    MissingReferences(Vec<String>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown tag label {0:?}")]
    UnknownTag(String),

    #[error("unknown category {given:?}; valid categories: {}", .valid.join(", "))]
    UnknownCategory {
        given: String,
        valid: Vec<&'static str>,
    },

    #[error("mask token {0:?} occurs in the corpus vocabulary")]
    MaskCollision(String),

    #[error("captions were tagged by different models ({expected} vs {found})")]
    TaggerMismatch { expected: String, found: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
