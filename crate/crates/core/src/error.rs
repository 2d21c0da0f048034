use thiserror::Error;

use crate::stream::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },

    #[error("work `{work}` cites itself (self-reference)")]
    SelfReference { work: String },

    #[error("work `{work}` cites unknown work `{cited}`")]
    UnknownCitation { work: String, cited: String },

    #[error("work `{work}` cites `{cited}`, which is not published before it (forward citation)")]
    ForwardCitation { work: String, cited: String },

    #[error("work `{work}` lists unregistered author `{actor}`")]
    UnregisteredAuthor { work: String, actor: String },

    #[error("duplicate work id `{0}`")]
    DuplicateWork(String),

    #[error("duplicate actor id `{0}`")]
    DuplicateActor(String),

    #[error("stream failed validation with {} violation(s)", .0.violations.len())]
    Invalid(ValidationReport),

    #[error("unknown actor index {0}")]
    UnknownActor(usize),

    #[error("unknown work index {0}")]
    UnknownWork(usize),

    #[error("out-of-order event: seq {seq} applied to index as of {as_of}")]
    OutOfOrder { seq: i64, as_of: i64 },

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("non-finite covariate in stratum {stratum}")]
    NonFinite { stratum: usize },

    #[error("no informative strata")]
    NoInformativeStrata,

    #[error("enumeration bound exceeded: {count} candidate sets > {bound}")]
    EnumerationBound { count: String, bound: u64 },

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
