use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing mandatory column(s): {}", .0.join(", "))]
    MissingColumns(Vec<String>),

    #[error("line {line}: {reason}")]
    InvalidRow { line: usize, reason: String },

    #[error("malformed input: {0}")]
    Format(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("empty corpus after preprocessing")]
    EmptyAfterPreprocessing,

    #[error("document {id} dated {date} is outside the term table")]
    OutsideTermTable { id: String, date: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{what} index {index} out of range (limit {limit})")]
    OutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("word not in vocabulary: {0}")]
    UnknownWord(String),

    #[error("words not in vocabulary: {}", .0.join(", "))]
    UnknownWords(Vec<String>),

    #[error("document has no in-vocabulary tokens")]
    AllOutOfVocabulary,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("zero-norm vector")]
    ZeroVector,

    #[error("training with k = {k} failed: {source}")]
    Sweep {
        k: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
