use thiserror::Error;

use crate::rtsp::{ConformanceReport, RtspMethod, SessionState};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{provider} request failed (retryable: {retryable}): {message}")]
    Provider {
        provider: &'static str,
        retryable: bool,
        message: String,
    },

    #[error("embedding chunk {doc_id}#{index} failed: {source}")]
    Build {
        doc_id: String,
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("cosine similarity undefined: {0}")]
    UndefinedSimilarity(String),

    #[error("unknown RTSP method `{0}`")]
    UnknownMethod(String),

    #[error("malformed RTSP request: {0}")]
    MalformedRequest(String),

    #[error("cannot serialize request: {0}")]
    Serialize(String),

    #[error("invalid transition: {method} is not allowed in state {state}")]
    InvalidTransition {
        state: SessionState,
        method: RtspMethod,
    },

    #[error("template slot `{0}` has no value")]
    MissingSlot(String),

    #[error("malformed agent step: {0}")]
    MalformedStep(String),

    #[error("agent run failed: {0}")]
    AgentRun(String),

    #[error("enrichment answer could not be parsed: {0}")]
    EnrichmentFormat(String),

    #[error("enrichment rejected: {reason}")]
    EnrichmentRejected {
        reason: String,
        report: Box<ConformanceReport>,
    },

    #[error("tokenization error: {0}")]
    Tokenize(String),

    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn format(path: impl AsRef<std::path::Path>, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.as_ref().display().to_string(),
            line,
            message: message.into(),
        }
    }

    /// Whether retrying the same call could succeed.
    pub fn is_retryable(&self) -> bool {
        matches!(self, Error::Provider { retryable: true, .. })
    }
}
