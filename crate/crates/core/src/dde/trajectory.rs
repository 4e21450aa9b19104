use crate::error::Result;
use crate::state::State;

use super::history::{History, Segment};
use super::solver::StepStats;

/// Dense solution on `[-r, t_end]`, initial history included.
#[derive(Clone, Debug)]
pub struct Trajectory {
    history: History,
    breakpoints: Vec<f64>,
    stats: StepStats,
    delay: f64,
}

impl Trajectory {
    pub(crate) fn new(history: History, breakpoints: Vec<f64>, stats: StepStats, delay: f64) -> Self {
        Trajectory {
            history,
            breakpoints,
            stats,
            delay,
        }
    }

    pub fn dim(&self) -> usize {
        self.history.dim()
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn t_end(&self) -> f64 {
        self.history.span().1
    }

    /// Derivative-discontinuity times `k r`, all of which are step endpoints.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    /// Dense-output value; exact at step endpoints.
    pub fn eval(&self, t: f64) -> Result<State> {
        self.history.eval(t)
    }

    pub fn derivative(&self, t: f64) -> Result<State> {
        self.history.derivative(t)
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    /// Accepted step endpoints on `[0, t_end]`, starting with 0.
    pub fn step_times(&self) -> Vec<f64> {
        let mut times = vec![0.0];
        times.extend(self.steps().map(Segment::end));
        times
    }

    /// The accepted steps (initial history pieces excluded).
    pub fn steps(&self) -> impl Iterator<Item = &Segment> {
        self.history
            .segments()
            .filter(|s| s.start() >= 0.0 && s.end() > s.start())
    }

    /// `per_segment` samples per piece over the whole window `[-r, t_end]`.
    pub fn sample(&self, per_segment: usize) -> Vec<(f64, State)> {
        self.history.sample(per_segment)
    }

    /// The last delay interval re-based to `[-r, 0]`, suitable as the
    /// initial function of a continuation run.
    pub fn restart_history(&self) -> History {
        if self.delay > 0.0 {
            self.history.tail(self.delay)
        } else {
            let end = self.t_end();
            History::constant(self.history.eval_unchecked(end), 0.0).expect("zero delay is valid")
        }
    }
}
