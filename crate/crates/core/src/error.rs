//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by model construction, integration, data loading and fitting.
#[derive(Debug, Error)]
pub enum Error {
    #[error("state has {got} compartments but {variant} expects {expected}")]
    DimensionMismatch {
        variant: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("rate `{rate}` is {value}, outside [0, 1]")]
    RateOutOfRange { rate: &'static str, value: f64 },

    #[error("rate `{rate}` is required by {variant} but absent")]
    MissingRate {
        rate: &'static str,
        variant: &'static str,
    },

    #[error("rate `{rate}` does not belong to {variant}")]
    InactiveRate {
        rate: &'static str,
        variant: &'static str,
    },

    #[error("population must be positive, got {0}")]
    NonPositivePopulation(f64),

    #[error("initial susceptible count is negative ({s0}); observed compartments exceed the population")]
    InfeasibleInitialState { s0: f64 },

    #[error("non-finite value in `{what}`{}", day.map(|d| format!(" at day {d}")).unwrap_or_default())]
    NonFinite { what: String, day: Option<u32> },

    #[error("network input has length {got}, expected {expected}")]
    InputDimensionMismatch { expected: usize, got: usize },

    #[error("invalid network shape: {0}")]
    NetworkShape(String),

    #[error("forward cache does not match network shape: {0}")]
    CacheMismatch(String),

    #[error("series lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("predicted trajectory ({predicted} days) does not span the observed window ({observed} days)")]
    ShortTrajectory { predicted: usize, observed: usize },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: bad header, expected `date,cumulative_cases,recovered,deaths`")]
    BadHeader { path: String },

    #[error("{path}: row {row}: {message}")]
    BadRow {
        path: String,
        row: usize,
        message: String,
    },

    #[error("{path}: missing {expected} between {before} and {after} (row {row})")]
    DateGap {
        path: String,
        row: usize,
        before: chrono::NaiveDate,
        after: chrono::NaiveDate,
        expected: chrono::NaiveDate,
    },

    #[error("{path}: row {row}: `{column}` decreases from {previous} to {value}")]
    NonMonotonic {
        path: String,
        row: usize,
        column: &'static str,
        previous: f64,
        value: f64,
    },

    #[error("{path}: row {row}: recovered + deaths ({sum}) exceeds cumulative cases ({cumulative})")]
    InconsistentCounts {
        path: String,
        row: usize,
        sum: f64,
        cumulative: f64,
    },

    #[error("series has {len} days, too short for a {holdout}-day holdout")]
    SeriesTooShort { len: usize, holdout: usize },

    #[error("the gradient training path requires the Euler scheme")]
    GradientsRequireEuler,

    #[error("training diverged at iteration {iteration}: loss became non-finite")]
    Divergence { iteration: u32 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
