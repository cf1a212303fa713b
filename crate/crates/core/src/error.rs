use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("vocabulary size mismatch: {left} vs {right}")]
    VocabMismatch { left: u32, right: u32 },

    #[error("zero-norm vector ({context})")]
    ZeroNorm { context: String },

    #[error("non-finite value at position {position}")]
    NonFinite { position: usize },

    #[error("invalid sparse vector: {0}")]
    InvalidSparse(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("document {doc_id}: {reason}")]
    InvalidDocument { doc_id: String, reason: String },

    #[error("ranked lists disagree on query id: {expected} vs {found}")]
    QueryIdMismatch { expected: String, found: String },

    #[error("no vector available for document {0}")]
    MissingVector(String),

    #[error("{method} requires a {side} query vector")]
    MissingQueryVector {
        method: &'static str,
        side: &'static str,
    },

    #[error("duplicate judgment for query {query_id}, document {doc_id}")]
    DuplicateJudgment { query_id: String, doc_id: String },

    #[error("no evaluable queries: none of the run's queries have judgments")]
    NoEvaluableQueries,

    #[error("empty input: {0}")]
    Empty(&'static str),
}

impl Error {
    pub(crate) fn zero_norm(context: impl Into<String>) -> Self {
        Error::ZeroNorm {
            context: context.into(),
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
