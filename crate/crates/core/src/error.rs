use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("element `{id}`: {reason}")]
    InvalidElement { id: String, reason: String },

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("invalid criteria: {0}")]
    InvalidCriteria(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("grid index is empty")]
    EmptyGridIndex,

    #[error("invalid grid index: {0}")]
    InvalidGridIndex(String),

    #[error("child box has zero area")]
    ZeroArea,

    #[error("non-finite {term} gradient for element `{id}`")]
    NonFiniteGradient { id: String, term: &'static str },

    #[error("saliency map: {0}")]
    Saliency(String),

    #[error("layouts do not share element ids: {0}")]
    IdMismatch(String),

    #[error("not implemented: {0}")]
    NotImplemented(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numeric pipeline rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NonFiniteGradient { .. })
    }
}
