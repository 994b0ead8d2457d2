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

    #[error("{path}: malformed delimited data: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: missing column `{column}` in header")]
    MissingColumn { path: PathBuf, column: String },

    #[error("{path}: duplicate id `{id}` at row {row}")]
    DuplicateId { path: PathBuf, id: String, row: usize },

    #[error("{path}: empty {field} field at row {row}")]
    EmptyField {
        path: PathBuf,
        field: &'static str,
        row: usize,
    },

    #[error("{0}: no records")]
    EmptyCorpus(String),

    #[error("invalid removal pattern `{name}`: {source}")]
    Pattern {
        name: String,
        #[source]
        source: regex::Error,
    },

    #[error("index needs at least one document")]
    EmptyIndex,

    #[error("document `{0}` has no tokens")]
    EmptyDocument(String),

    #[error("unknown document id `{0}`")]
    UnknownDocument(String),

    #[error("every sentence is empty")]
    AllSentencesEmpty,

    #[error("power iteration did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("guided summarization needs a theme index")]
    MissingThemeIndex,

    #[error("vector dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("zero-norm vector")]
    ZeroNorm,

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("no embedding for `{0}`")]
    MissingEmbedding(String),

    #[error("appeal `{0}` is empty after preprocessing")]
    EmptyAfterPreprocessing(String),

    #[error("empty relevant set")]
    EmptyRelevantSet,

    #[error("no evaluable rankings ({skipped} skipped)")]
    NothingToEvaluate { skipped: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
