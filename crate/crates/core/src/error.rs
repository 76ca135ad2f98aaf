use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("vocabulary empty after filtering")]
    EmptyVocabulary,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("line {line}: {message}")]
    MalformedRecord { line: usize, message: String },

    #[error("duplicate document id {0:?}")]
    DuplicateId(String),

    #[error("word has zero probability under all topics")]
    ZeroProbability,

    #[error("not a probability vector: {0}")]
    NotInSimplex(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range (len {len})")]
    OutOfRange { index: usize, len: usize },

    #[error("degenerate attribution; nothing to scale")]
    DegenerateAttribution,

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("training labels: {0}")]
    Labels(String),

    #[error("invalid model file: {0}")]
    Model(String),

    #[error("image: {0}")]
    Image(#[from] image::ImageError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
