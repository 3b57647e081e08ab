use thiserror::Error;

use crate::ranks::View;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid rank triple (r={r}, r1={r1}, r2={r2}): {reason}")]
    InvalidRankTriple {
        r: usize,
        r1: usize,
        r2: usize,
        reason: &'static str,
    },

    #[error("invalid problem shape: {0}")]
    InvalidShape(String),

    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("duplicate coordinate ({row}, {col})")]
    DuplicateCoordinate { row: usize, col: usize },

    #[error("samples per column l={l} exceeds row count n={n}")]
    SamplesExceedRows { l: usize, n: usize },

    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("epsilon {0} is outside (0, 1)")]
    EpsilonOutOfRange(f64),

    #[error(
        "column {column} of view {view} has {observed} observed entries, at least {required} required"
    )]
    Assumption1Violated {
        view: View,
        /// Zero-based index into the full pattern.
        column: usize,
        observed: usize,
        required: usize,
    },

    #[error("row block {0} is numerically singular; basis is not generic")]
    SingularRowBlock(&'static str),

    #[error("pivot system for column {column} is numerically singular")]
    SingularPivotSystem { column: usize },

    #[error("subset enumeration exceeded the cap of {cap} visited nodes")]
    EnumerationCapExceeded { cap: u64 },

    #[error("oracle configuration: {0}")]
    InvalidOracleConfig(String),

    #[error("random evaluation points gave inconsistent Jacobian ranks ({first} vs {second})")]
    DegenerateRandomPoint { first: usize, second: usize },
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidRankTriple { .. } => "invalid-rank-triple",
            Error::InvalidShape(_) => "invalid-shape",
            Error::Overflow(_) => "overflow",
            Error::Parse { .. } => "parse-error",
            Error::DimensionMismatch(_) => "dimension-mismatch",
            Error::DuplicateCoordinate { .. } => "duplicate-coordinate",
            Error::SamplesExceedRows { .. } => "samples-exceed-rows",
            Error::ProbabilityOutOfRange(_) => "probability-out-of-range",
            Error::EpsilonOutOfRange(_) => "epsilon-out-of-range",
            Error::Assumption1Violated { .. } => "assumption1-violated",
            Error::SingularRowBlock(_) => "singular-row-block",
            Error::SingularPivotSystem { .. } => "singular-pivot-system",
            Error::EnumerationCapExceeded { .. } => "enumeration-cap-exceeded",
            Error::InvalidOracleConfig(_) => "invalid-oracle-config",
            Error::DegenerateRandomPoint { .. } => "degenerate-random-point",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
