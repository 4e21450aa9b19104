use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::state::State;

/// One piece of a piecewise-polynomial solution.
///
/// Either a user-supplied polynomial piece of the initial history or an
/// accepted Runge-Kutta step carrying its continuous extension.
#[derive(Clone, Debug)]
pub struct Segment {
    start: f64,
    end: f64,
    kind: Kind,
}

#[derive(Clone, Debug)]
enum Kind {
    /// Coefficients of a polynomial in `t - origin`, lowest power first.
    Poly { origin: f64, coeffs: Vec<State> },
    /// Dormand-Prince step: endpoint values plus the four continuous
    /// extension coefficients. The interpolant matches value and slope at
    /// both ends (a cubic Hermite piece) plus a quartic correction term.
    Step { y0: State, y1: State, c: [State; 4] },
}

impl Segment {
    pub(crate) fn polynomial(start: f64, end: f64, origin: f64, coeffs: Vec<State>) -> Self {
        Segment {
            start,
            end,
            kind: Kind::Poly { origin, coeffs },
        }
    }

    pub(crate) fn step(start: f64, end: f64, y0: State, y1: State, c: [State; 4]) -> Self {
        Segment {
            start,
            end,
            kind: Kind::Step { y0, y1, c },
        }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    /// Evaluates the piece. Arguments slightly outside `[start, end]` are
    /// extrapolated; callers are responsible for range checks.
    pub fn eval(&self, t: f64) -> State {
        match &self.kind {
            Kind::Poly { origin, coeffs } => {
                let u = t - origin;
                coeffs
                    .iter()
                    .rev()
                    .fold(State::zeros(coeffs[0].dim()), |acc, c| u * acc + *c)
            }
            Kind::Step { y0, y1, c } => {
                if t == self.start {
                    return *y0;
                }
                if t == self.end {
                    return *y1;
                }
                let theta = (t - self.start) / (self.end - self.start);
                let theta1 = 1.0 - theta;
                *y0 + theta * (c[0] + theta1 * (c[1] + theta * (c[2] + theta1 * c[3])))
            }
        }
    }

    pub fn derivative(&self, t: f64) -> State {
        match &self.kind {
            Kind::Poly { origin, coeffs } => {
                let u = t - origin;
                let dim = coeffs[0].dim();
                coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .rev()
                    .fold(State::zeros(dim), |acc, (k, c)| u * acc + (k as f64) * *c)
            }
            Kind::Step { c, .. } => {
                let h = self.end - self.start;
                let theta = (t - self.start) / h;
                let theta1 = 1.0 - theta;
                // y = y0 + theta * p(theta), p = c0 + theta1 * q, q = c1 + theta * w,
                // w = c2 + theta1 * c3
                let w = c[2] + theta1 * c[3];
                let q = c[1] + theta * w;
                let p = c[0] + theta1 * q;
                let dq = w - theta * c[3];
                let dp = theta1 * dq - q;
                (1.0 / h) * (p + theta * dp)
            }
        }
    }

    pub(crate) fn shifted(&self, dt: f64) -> Segment {
        let kind = match &self.kind {
            Kind::Poly { origin, coeffs } => Kind::Poly {
                origin: origin + dt,
                coeffs: coeffs.clone(),
            },
            Kind::Step { .. } => self.kind.clone(),
        };
        Segment {
            start: self.start + dt,
            end: self.end + dt,
            kind,
        }
    }
}

/// State over a time window, stored as contiguous polynomial pieces.
///
/// Used both for the initial function on `[-r, 0]` and, grown step by step,
/// for the full solution on `[-r, t_end]`.
#[derive(Clone, Debug)]
pub struct History {
    dim: usize,
    start: f64,
    end: f64,
    segments: VecDeque<Segment>,
}

impl History {
    /// Constant initial function `phi(t) = value` on `[-r, 0]`.
    pub fn constant(value: State, r: f64) -> Result<Self> {
        check_delay(r)?;
        Ok(History::single(
            Segment::polynomial(-r, 0.0, 0.0, vec![value]),
            value.dim(),
        ))
    }

    /// Polynomial initial function on `[-r, 0]`; `coeffs[i]` holds the
    /// coefficients of `t^i` for every component.
    pub fn polynomial(coeffs: Vec<State>, r: f64) -> Result<Self> {
        check_delay(r)?;
        let dim = match coeffs.first() {
            Some(c) => c.dim(),
            None => return Err(Error::InvalidArgument("empty polynomial".into())),
        };
        if coeffs.iter().any(|c| c.dim() != dim || !c.is_finite()) {
            return Err(Error::InvalidArgument(
                "polynomial coefficients must be finite and of equal dimension".into(),
            ));
        }
        Ok(History::single(Segment::polynomial(-r, 0.0, 0.0, coeffs), dim))
    }

    /// Piecewise-linear interpolant through `(times[i], values[i])`. The
    /// knots must increase strictly from `-r` to `0`.
    pub fn piecewise_linear(times: &[f64], values: &[State]) -> Result<Self> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(Error::InvalidArgument(
                "need at least two knots with one value each".into(),
            ));
        }
        if *times.last().unwrap() != 0.0 {
            return Err(Error::InvalidArgument("last knot must be t = 0".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("knots must increase strictly".into()));
        }
        let dim = values[0].dim();
        if values.iter().any(|v| v.dim() != dim || !v.is_finite()) {
            return Err(Error::InvalidArgument("knot values must be finite".into()));
        }
        let segments = times
            .windows(2)
            .zip(values.windows(2))
            .map(|(t, v)| {
                let slope = (1.0 / (t[1] - t[0])) * (v[1] - v[0]);
                Segment::polynomial(t[0], t[1], t[0], vec![v[0], slope])
            })
            .collect();
        Ok(History {
            dim,
            start: times[0],
            end: 0.0,
            segments,
        })
    }

    fn single(seg: Segment, dim: usize) -> Self {
        History {
            dim,
            start: seg.start,
            end: seg.end,
            segments: VecDeque::from([seg]),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The window `[start, end]` on which the history is defined.
    pub fn span(&self) -> (f64, f64) {
        (self.start, self.end)
    }

    pub fn segments(&self) -> impl Iterator<Item = &Segment> {
        self.segments.iter()
    }

    pub fn eval(&self, t: f64) -> Result<State> {
        self.check(t)?;
        Ok(self.locate(t).eval(t))
    }

    pub fn derivative(&self, t: f64) -> Result<State> {
        self.check(t)?;
        Ok(self.locate(t).derivative(t))
    }

    /// Samples every piece at `per_segment` equally spaced points plus the
    /// final endpoint, restricted to the window.
    pub fn sample(&self, per_segment: usize) -> Vec<(f64, State)> {
        let n = per_segment.max(1);
        let mut out = Vec::with_capacity(self.segments.len() * n + 1);
        for seg in &self.segments {
            let lo = seg.start.max(self.start);
            if seg.end <= lo && seg.end != self.end {
                continue;
            }
            for k in 0..n {
                let t = lo + (seg.end - lo) * (k as f64) / (n as f64);
                out.push((t, seg.eval(t)));
            }
        }
        out.push((self.end, self.locate(self.end).eval(self.end)));
        out
    }

    fn check(&self, t: f64) -> Result<()> {
        if t >= self.start && t <= self.end {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                t,
                lo: self.start,
                hi: self.end,
            })
        }
    }

    /// Evaluation without range checks; arguments beyond either end use the
    /// nearest piece.
    pub(crate) fn eval_unchecked(&self, t: f64) -> State {
        self.locate(t).eval(t)
    }

    fn locate(&self, t: f64) -> &Segment {
        let idx = self.segments.partition_point(|s| s.end < t);
        &self.segments[idx.min(self.segments.len() - 1)]
    }

    pub(crate) fn push(&mut self, seg: Segment) {
        self.end = seg.end;
        self.segments.push_back(seg);
    }

    /// Drops pieces lying entirely before `t`, keeping the window start at
    /// `t` or earlier.
    pub(crate) fn prune_before(&mut self, t: f64) {
        while self.segments.len() > 1 && self.segments[0].end < t {
            self.segments.pop_front();
        }
        self.start = self.start.max(t.min(self.segments[0].end));
    }

    /// The trailing window `[end - r, end]` re-based so that it spans
    /// `[-r, 0]`.
    pub(crate) fn tail(&self, r: f64) -> History {
        let from = self.end - r;
        let first = self.segments.partition_point(|s| s.end <= from);
        let segments = self
            .segments
            .iter()
            .skip(first.min(self.segments.len() - 1))
            .map(|s| s.shifted(-self.end))
            .collect();
        History {
            dim: self.dim,
            start: -r,
            end: 0.0,
            segments,
        }
    }
}

fn check_delay(r: f64) -> Result<()> {
    if r.is_finite() && r >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "delay must be finite and >= 0, got {r}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_history_is_constant() {
        let h = History::constant(State::pair(0.3, 0.7), 2.0).unwrap();
        assert_eq!(h.span(), (-2.0, 0.0));
        assert_eq!(h.eval(-1.3).unwrap(), State::pair(0.3, 0.7));
        assert_eq!(h.derivative(-0.5).unwrap(), State::pair(0.0, 0.0));
    }

    #[test]
    fn queries_outside_window_fail() {
        let h = History::constant(State::scalar(1.0), 1.0).unwrap();
        assert!(matches!(h.eval(-1.0000001), Err(Error::OutOfRange { .. })));
        assert!(matches!(h.eval(1e-9), Err(Error::OutOfRange { .. })));
        assert!(h.eval(-1.0).is_ok());
    }

    #[test]
    fn polynomial_history_uses_absolute_time() {
        // 1 + 2t - t^2
        let coeffs = vec![State::scalar(1.0), State::scalar(2.0), State::scalar(-1.0)];
        let h = History::polynomial(coeffs, 1.0).unwrap();
        assert_eq!(h.eval(-0.5).unwrap()[0], 1.0 - 1.0 - 0.25);
        assert_eq!(h.derivative(-0.5).unwrap()[0], 2.0 + 1.0);
    }

    #[test]
    fn piecewise_linear_is_continuous_at_knots() {
        let times = [-1.0, -0.4, 0.0];
        let vals = [State::scalar(0.0), State::scalar(1.0), State::scalar(0.5)];
        let h = History::piecewise_linear(&times, &vals).unwrap();
        assert!((h.eval(-0.4).unwrap()[0] - 1.0).abs() < 1e-15);
        assert!((h.eval(-0.2).unwrap()[0] - 0.75).abs() < 1e-15);
        assert!((h.eval(-0.7).unwrap()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_knots() {
        let vals = [State::scalar(0.0), State::scalar(1.0)];
        assert!(History::piecewise_linear(&[-1.0, -0.5], &vals).is_err());
        assert!(History::piecewise_linear(&[0.0, 0.0], &vals).is_err());
        assert!(History::constant(State::scalar(1.0), -1.0).is_err());
    }

    #[test]
    fn zero_delay_history_is_a_point() {
        let h = History::constant(State::scalar(2.0), 0.0).unwrap();
        assert_eq!(h.span(), (0.0, 0.0));
        assert_eq!(h.eval(0.0).unwrap()[0], 2.0);
    }
}
