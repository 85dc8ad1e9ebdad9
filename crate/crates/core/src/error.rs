use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A partial quotient smaller than 1 was supplied or produced.
    #[error("invalid partial quotient {digit} at index {index}: digits must be >= 1")]
    InvalidDigit { index: usize, digit: i64 },

    /// A computation ran past the end of the known digit stream.
    #[error("digit stream exhausted: index {requested} requested, {available} available")]
    NeedsMoreDigits { requested: usize, available: usize },

    /// Randomness did not pin down enough digits; retry with more bits.
    #[error("insufficient precision: {bits} bits certified only {certified} digits (need {needed})")]
    InsufficientPrecision {
        bits: u64,
        certified: usize,
        needed: usize,
    },

    /// An enclosure straddles a decision boundary (e.g. a Gauss-map digit).
    #[error("enclosure [{lo}, {hi}] is too wide to decide {what}; retry with tighter input")]
    AmbiguousEnclosure { lo: f64, hi: f64, what: String },

    /// Input is outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two digit streams do not match any supported comparison pattern.
    #[error("pattern error: {0}")]
    Pattern(String),

    /// A finite-difference test could not be resolved beyond interval error.
    #[error("inconclusive comparison: interval widths exceed the difference; widen precision")]
    Inconclusive,
}

pub type Result<T> = std::result::Result<T, Error>;
