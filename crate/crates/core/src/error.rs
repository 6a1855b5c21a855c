use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// All weights were zero, so no probability table can be formed.
    #[error("degenerate distribution: weights sum to zero")]
    DegenerateDistribution,

    /// An operation that needs data received none.
    #[error("empty data: {0}")]
    EmptyData(String),

    /// Two histograms or tables with different bin counts were combined.
    #[error("bin count mismatch: expected {expected}, got {actual}")]
    BinMismatch { expected: usize, actual: usize },

    /// A record stream was not ordered by day.
    #[error("records not sorted by day: day {found} appeared after day {previous}")]
    UnsortedInput { previous: u32, found: u32 },

    /// A configuration file could not be read or understood.
    #[error("config error: {0}")]
    Config(String),

    /// One input line could not be turned into a transaction record.
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    /// More malformed lines than the caller was willing to tolerate.
    #[error("parse error budget exceeded: {errors} bad lines (budget {budget})")]
    ErrorBudgetExceeded { errors: u64, budget: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
