use thiserror::Error;

/// Errors produced by integration, model evaluation and analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("time {t} is outside the solution window [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    /// The state became non-finite; `t` is the last time with a valid state.
    #[error("solution diverged (last finite state at t = {t})")]
    Diverged { t: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("response function evaluated at its pole s = {s}")]
    Pole { s: f64 },

    #[error("no positive survival state (am = {am} <= 1)")]
    NoSurvivalState { am: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("not an equilibrium (residual {residual:e})")]
    NotAnEquilibrium { residual: f64 },

    #[error("wrong stability case: {0}")]
    WrongCase(String),

    #[error("characteristic root search failed: {0}")]
    RootSearch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
