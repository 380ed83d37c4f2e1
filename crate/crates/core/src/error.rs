use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("corpus line {line} has {length} symbols, exceeding the maximum length {max}")]
    LineTooLong { line: usize, length: usize, max: usize },

    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),

    #[error("symbol {0:?} is not in the vocabulary")]
    UnknownSymbol(String),

    #[error("token id {0} is outside the vocabulary")]
    TokenOutOfRange(u32),

    #[error("sequence has interior length {length}, exceeding the maximum length {max}")]
    SequenceTooLong { length: usize, max: usize },

    #[error("malformed sequence: {0}")]
    MalformedSequence(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("support enumeration exceeded the cap of {cap} sequences (reached {reached})")]
    SupportTooLarge { cap: usize, reached: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("both samples have zero variance; the t statistic is undefined")]
    DegenerateVariance,

    #[error("paired samples differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unknown context id {0:?}")]
    UnknownContext(String),

    #[error("unknown system {system:?} for context {context:?}")]
    UnknownSystem { context: String, system: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("context {context:?}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
