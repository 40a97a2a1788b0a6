use thiserror::Error;

/// Errors raised by the allocation, simulation and numerics routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid bracket [{lo}, {hi}]: f(lo) - target = {f_lo}, f(hi) - target = {f_hi} do not straddle zero")]
    InvalidBracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("could not bracket target {target} after {doublings} doublings")]
    BracketGrowth { target: f64, doublings: u32 },

    #[error("quadrature did not converge after {subdivisions} subdivisions (value {value:e}, error estimate {error:e})")]
    NonConvergence {
        value: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("invalid link configuration: {0}")]
    InvalidConfig(String),

    #[error("exact SIR distribution requested but no interferer profile is available")]
    MissingTopology,

    #[error("method {method} requires scheme {expected}")]
    SchemeMismatch {
        method: &'static str,
        expected: &'static str,
    },

    #[error("{trials} trials cannot resolve error probability {target:e}; need at least {required} (override to force)")]
    Underpowered {
        trials: u64,
        target: f64,
        required: u64,
    },

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
