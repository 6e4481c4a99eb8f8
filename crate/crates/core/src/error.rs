use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid root system {label}: {reason}")]
    Configuration { label: String, reason: String },

    #[error("unsupported prime {0}: p must be an odd prime")]
    UnsupportedPrime(u64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("element is not in the first congruence kernel: {0}")]
    NotInKernel(String),

    #[error("model not faithful at graded level: {0}")]
    ModelNotFaithful(String),

    #[error("insufficient precision: {0}")]
    Precision(String),

    #[error("series context mismatch: {0} vs {1}")]
    Context(String, String),

    #[error("zero series has no leading term")]
    NoLeadingTerm,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
