use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid word: symbol {symbol} at position {position} is outside 1..={alphabet}")]
    InvalidWord {
        symbol: usize,
        position: usize,
        alphabet: usize,
    },

    #[error("map {index}: {reason}")]
    InvalidMap { index: usize, reason: String },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("point budget exceeded: {requested} points requested, limit is {limit} (raise with ATL_BUDGET_POINTS)")]
    BudgetExceeded { requested: u128, limit: u64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("recurrence search exhausted: {0}")]
    SearchExhausted(String),

    #[error("missing direction: {0}")]
    MissingDirection(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
