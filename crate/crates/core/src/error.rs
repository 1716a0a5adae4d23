use std::io;

use thiserror::Error;

/// Errors produced anywhere in the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("time {t} is not on the grid of step {step}")]
    OffGrid { t: f64, step: f64 },

    #[error("time window [{lo}, {hi}] exceeds the sampled domain [{t_min}, {t_max}]")]
    OutOfDomain {
        lo: f64,
        hi: f64,
        t_min: f64,
        t_max: f64,
    },

    #[error("grid of {0} points is too large")]
    GridOverflow(u128),

    #[error("trajectory diverged at t = {time} (|y| = {norm:e})")]
    Diverged { time: f64, norm: f64 },

    #[error("{clamps} negative excursions clamped in {steps} steps; refine the path")]
    Resolution { clamps: usize, steps: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("numeric budget exceeded: {0}")]
    Budget(String),

    #[error("config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("malformed path dump: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
