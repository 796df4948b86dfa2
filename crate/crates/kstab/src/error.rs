//! Error type shared by all modules.

use thiserror::Error;

/// Errors raised by the exact pipeline.
///
/// Every variant corresponds to a structured failure a caller can act on;
/// silent defaults (a missing intersection number read as zero, a fit that
/// quietly drops a disagreeing sample) are deliberately impossible.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum KstabError {
    #[error("inconsistent samples: {0}")]
    InconsistentSamples(String),
    #[error("degree overflow: {0}")]
    DegreeOverflow(String),
    #[error("triangulation failure: {0}")]
    TriangulationFailure(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("function out of range: {0}")]
    FunctionOutOfRange(String),
    #[error("not semiample at this exponent: {0}")]
    NotSemiample(String),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("missing intersection entry: {0}")]
    MissingEntry(String),
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("division by zero: {0}")]
    DivisionByZero(String),
    #[error("leading term nonzero: {0}")]
    LeadingTermNonzero(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("nef certificate unavailable: {0}")]
    NefCertificateUnavailable(String),
    #[error("no threshold below cap: {0}")]
    NoThresholdBelowCap(String),
    #[error("negative discrepancy: {0}")]
    NegativeDiscrepancy(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, KstabError>;
