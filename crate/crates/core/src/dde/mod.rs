//! Method-of-steps integration of autonomous delay equations with one
//! constant delay.
//!
//! On every interval `[k r, (k + 1) r]` the delayed argument is already
//! known, so the equation is an ODE there. Steps are taken with the
//! Dormand-Prince 5(4) pair, are capped at `r`, and always land exactly on
//! the breakpoints `k r` where the solution loses smoothness. Each accepted
//! step keeps its continuous extension, which doubles as the history for
//! later delayed lookups.

mod history;
mod solver;
mod trajectory;

pub use history::{History, Segment};
pub use solver::{integrate, integrate_streaming, DdeSystem, SolverOptions, StepStats, StreamEnd};
pub use trajectory::Trajectory;
