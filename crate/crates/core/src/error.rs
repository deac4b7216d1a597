use num_bigint::BigUint;
use thiserror::Error;

/// Which hypothesis of the single-cell improvement step was violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepCondition {
    /// Some row already holds the target letter in the column.
    TargetLetterPresent,
    /// The moved letter is not duplicated elsewhere in the column.
    SourceLetterUnique,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game parameters n={n}, d={d}: both must be at least 1")]
    InvalidParams { n: u64, d: u64 },

    #[error("words have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("letter {value} is out of range for an alphabet of size {d}")]
    LetterOutOfRange { value: i64, d: u32 },

    #[error("malformed decoding matrix: {0}")]
    MalformedMatrix(String),

    #[error("invalid permutation tuple: {0}")]
    InvalidPermutation(String),

    #[error("{what} has {size} elements, which exceeds the enumeration cap of {cap}")]
    CapExceeded {
        what: &'static str,
        size: BigUint,
        cap: u64,
    },

    #[error("improvement step at column {column}, row {row} rejected: {condition:?}")]
    StepPrecondition {
        column: usize,
        row: usize,
        condition: StepCondition,
    },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid encoding: {0}")]
    InvalidEncoding(String),

    #[error("invalid randomized strategy: {0}")]
    InvalidRandomized(String),

    #[error("outside the domain of this construction: {0}")]
    Domain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("cannot parse rational {0:?}")]
    ParseRational(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
