use thiserror::Error;

/// Errors raised by the exponent library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("transition matrix is empty")]
    EmptyMatrix,
    #[error("row {row} has {len} entries, expected {expected}")]
    RaggedRow { row: usize, len: usize, expected: usize },
    #[error("input alphabet must have at least 2 letters, got {0}")]
    InputAlphabetTooSmall(usize),
    #[error("negative entry {value} at row {row}, column {col}")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("non-finite entry at row {row}, column {col}")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("row {row} sums to {sum}, not 1")]
    NonStochasticRow { row: usize, sum: f64 },
    #[error("input distribution is invalid: {0}")]
    InvalidDistribution(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("objective returned NaN at {at}")]
    NonFinite { at: f64 },
    #[error("optimization diverged: {0}")]
    Diverged(String),
    #[error("no finite critical rate found below {cap}")]
    NoFiniteR1 { cap: f64 },
    #[error("joint oracle supports at most 3 input letters, got {0}")]
    AlphabetTooLarge(usize),
    #[error("value {value} outside the domain of {what}")]
    DomainError { what: &'static str, value: f64 },
    #[error("rate function is not nonincreasing and convex near D = {at}")]
    InvalidRateFunction { at: f64 },
    #[error("exact binomial mode needs M <= 2^20 codewords, got {0}; use monte_carlo")]
    TooManyCodewords(f64),
    #[error("monte carlo mode needs at least 10000 trials, got {0}")]
    TooFewTrials(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
