use std::io;

use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    /// Input sequence shorter than the test requires.
    #[error("block too short: test needs at least {needed} bits, got {got}")]
    BlockTooShort { needed: usize, got: usize },
    #[error("sequence length {0} must be even")]
    OddLength(usize),
    #[error("unsupported parameter: {0}")]
    Unsupported(String),
    /// A file-backed bit source ran out of data.
    #[error("bit source exhausted: requested {requested} bits, {remaining} remaining")]
    SourceExhausted { requested: u64, remaining: u64 },
    #[error("enumeration needs {estimated} compositions, budget is {budget}")]
    BudgetExceeded { estimated: u128, budget: u128 },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    /// δ = 0: the distribution under study equals the null, so no finite limit exists.
    #[error("chi-squared discrepancy is zero; no finite sample-size limit")]
    ZeroDiscrepancy,
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
