//! Error type shared across the crate.

use alloc::string::String;

/// Errors produced by panel construction, estimation, solvers, and the
/// backtest engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("insufficient data for {context}: need at least {required}, have {actual}")]
    InsufficientData {
        context: &'static str,
        required: usize,
        actual: usize,
    },

    /// A cell failed a positivity or shape check during ingestion.
    #[error("invalid value at date {date}, ticker {ticker}: {reason}")]
    InvalidValue {
        date: String,
        ticker: String,
        reason: String,
    },

    /// A ticker present in the price data has no usable shares data.
    #[error("ticker {0} is present in prices but has no shares observations")]
    MissingTicker(String),

    /// A stock whose return series carries no information for the estimator.
    #[error("stock {0} has zero return variance over the estimation window")]
    DegenerateInput(String),

    /// The exact clustering solver only runs at desk scale.
    #[error("universe size {n} exceeds the exact solver cap {cap}; use solve_lagrangian")]
    ExactCapExceeded { n: usize, cap: usize },

    /// No observation exists on or before the requested date.
    #[error("no data on or before {0}")]
    NoData(String),

    #[error("burn-in not satisfied at {asof}: need {required} return rows strictly before it, have {available}")]
    BurnIn {
        asof: String,
        required: usize,
        available: usize,
    },

    /// The turnover budget cannot reach the selected support from the
    /// current holdings.
    #[error("turnover bound {bound} is infeasible: at least {min_turnover} must trade to move onto the support")]
    Infeasible { bound: f64, min_turnover: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = core::result::Result<T, Error>;
