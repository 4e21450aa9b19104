use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

/// State vector of a scalar or planar system.
///
/// Unused components of a scalar state are kept at zero so that the
/// arithmetic below never has to branch on the dimension.
#[derive(Clone, Copy, PartialEq)]
pub struct State {
    comps: [f64; 2],
    dim: u8,
}

impl State {
    pub const fn scalar(x: f64) -> Self {
        State {
            comps: [x, 0.0],
            dim: 1,
        }
    }

    pub const fn pair(first: f64, second: f64) -> Self {
        State {
            comps: [first, second],
            dim: 2,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 1 || dim == 2, "state dimension must be 1 or 2");
        State {
            comps: [0.0; 2],
            dim: dim as u8,
        }
    }

    pub fn from_slice(values: &[f64]) -> Self {
        match *values {
            [x] => State::scalar(x),
            [s, x] => State::pair(s, x),
            _ => panic!("state dimension must be 1 or 2, got {}", values.len()),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.comps[..self.dim()]
    }

    /// The population component: the only component of a scalar state, the
    /// organism concentration of a planar chemostat state.
    pub fn last(&self) -> f64 {
        self.comps[self.dim() - 1]
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.as_slice().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_component(&self) -> f64 {
        self.as_slice().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn map2(self, other: State, f: impl Fn(f64, f64) -> f64) -> State {
        State {
            comps: [f(self.comps[0], other.comps[0]), f(self.comps[1], other.comps[1])],
            dim: self.dim.max(other.dim),
        }
    }
}

impl Index<usize> for State {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl Add for State {
    type Output = State;

    fn add(self, rhs: State) -> State {
        self.map2(rhs, |a, b| a + b)
    }
}

impl Sub for State {
    type Output = State;

    fn sub(self, rhs: State) -> State {
        self.map2(rhs, |a, b| a - b)
    }
}

impl Mul<State> for f64 {
    type Output = State;

    fn mul(self, rhs: State) -> State {
        State {
            comps: [self * rhs.comps[0], self * rhs.comps[1]],
            dim: rhs.dim,
        }
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}
