//! Equilibria, linearization and local stability of the scalar models.
//!
//! Linearizing `x' = F(x(t), x(t - r))` at an equilibrium gives
//! `xi' = a_lin xi(t) + b_lin xi(t - r)` with characteristic equation
//! `lambda = a_lin + b_lin e^{-lambda r}`. The sign pattern of the
//! coefficients decides stability:
//!
//! * A: `a + b > 0`: unstable.
//! * B: `a + b < 0`, `b >= a`: stable for every delay.
//! * C: `a + b < 0`, `b < a`: stable below the critical delay
//!   `r* = arccos(-a/b) / sqrt(b^2 - a^2)`, unstable above it.
//! * D: `a + b = 0`: `lambda = 0` is a root; the linearization is
//!   inconclusive.

mod roots;

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::models::{holling_slope, DimensionlessParams, Model};
use crate::state::State;

pub use roots::{
    characteristic, characteristic_residual, count_roots_in_rect, leading_root, real_part_bound,
    ROOT_RESIDUAL_TOL,
};

/// Inputs within this distance of `a + b = 0` are classified as case D.
pub const CASE_BOUNDARY_TOL: f64 = 1e-12;

/// Largest equilibrium residual accepted by [`linearize`].
pub const EQUILIBRIUM_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquilibriumKind {
    Washout,
    Survival,
}

impl fmt::Display for EquilibriumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EquilibriumKind::Washout => "washout",
            EquilibriumKind::Survival => "survival",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Equilibrium {
    pub kind: EquilibriumKind,
    pub value: State,
}

/// Coefficients of `xi' = a_lin xi(t) + b_lin xi(t - r)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Linearization {
    pub a_lin: f64,
    pub b_lin: f64,
    pub delay_r: f64,
}

impl Linearization {
    pub fn new(a_lin: f64, b_lin: f64, delay_r: f64) -> Self {
        Linearization {
            a_lin,
            b_lin,
            delay_r,
        }
    }

    pub fn with_delay(self, delay_r: f64) -> Self {
        Linearization { delay_r, ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabilityCase {
    A,
    B,
    C,
    D,
}

impl fmt::Display for StabilityCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityReport {
    pub case: StabilityCase,
    /// First delay at which a root pair crosses the imaginary axis (case C).
    pub critical_delay: Option<f64>,
    /// Crossing frequency `sqrt(b^2 - a^2)` (case C).
    pub omega: Option<f64>,
    pub leading_root: Complex64,
}

/// Verdict on the zero solution of the linearization at the report's delay.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalBehavior {
    Stable,
    Unstable,
    Critical,
}

impl fmt::Display for LocalBehavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LocalBehavior::Stable => "locally stable",
            LocalBehavior::Unstable => "unstable",
            LocalBehavior::Critical => "critical (linearization inconclusive)",
        })
    }
}

impl StabilityReport {
    pub fn local_behavior(&self) -> LocalBehavior {
        let re = self.leading_root.re;
        if re.abs() <= 1e-10 {
            LocalBehavior::Critical
        } else if re < 0.0 {
            LocalBehavior::Stable
        } else {
            LocalBehavior::Unstable
        }
    }
}

/// All non-negative equilibria; survival states only when they exist.
pub fn equilibria(model: &Model) -> Vec<Equilibrium> {
    let washout = |value| Equilibrium {
        kind: EquilibriumKind::Washout,
        value,
    };
    let survival = |value| Equilibrium {
        kind: EquilibriumKind::Survival,
        value,
    };
    match *model {
        Model::Chemostat(p) => {
            let mut out = vec![washout(State::pair(1.0, 0.0))];
            if let Some(s) = survival_substrate(&p) {
                out.push(survival(State::pair(s, p.effective_yield() * (1.0 - s))));
            }
            out
        }
        Model::Hyperbolic(p) => {
            let mut out = vec![washout(State::scalar(0.0))];
            if let Some(s) = survival_substrate(&p) {
                out.push(survival(State::scalar(p.effective_yield() * (1.0 - s))));
            }
            out
        }
        Model::ChemoLogistic(p) => {
            let mut out = vec![washout(State::scalar(0.0))];
            let ak = p.a * p.effective_yield();
            if ak > 1.0 {
                out.push(survival(State::scalar((ak - 1.0) / p.a)));
            }
            out
        }
        Model::Hutchinson(p) => {
            let mut out = vec![washout(State::scalar(0.0))];
            let am = p.a * p.m;
            if am > 1.0 {
                out.push(survival(State::scalar((am - 1.0) / p.a)));
            }
            out
        }
        Model::Wright { .. } => vec![washout(State::scalar(-1.0)), survival(State::scalar(0.0))],
        Model::Linear { .. } => vec![washout(State::scalar(0.0))],
    }
}

/// The equilibrium of the given kind, if it exists.
pub fn find_equilibrium(model: &Model, kind: EquilibriumKind) -> Option<Equilibrium> {
    equilibria(model).into_iter().find(|e| e.kind == kind)
}

/// Substrate level `s` in (0, 1) with `m e^{-r} f(s) = 1`, found by bisection
/// on the increasing response.
fn survival_substrate(p: &DimensionlessParams) -> Option<f64> {
    if !p.survival_possible() {
        return None;
    }
    let k = p.effective_yield();
    let g = |s: f64| k * p.a * s / (1.0 + p.b * s) - 1.0;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(if g(lo).abs() <= g(hi).abs() { lo } else { hi })
}

/// Sup-norm of the right-hand side at a constant state.
pub fn equilibrium_residual(model: &Model, value: State) -> Result<f64> {
    Ok(model.rhs(value, value)?.max_abs())
}

/// Partial derivatives of the right-hand side with respect to the current
/// and the delayed state at an equilibrium of a scalar model.
pub fn linearize(model: &Model, eq: &Equilibrium) -> Result<Linearization> {
    if let Model::Chemostat(_) = model {
        return Err(Error::Unsupported(
            "the planar chemostat has no scalar linearization; use its hyperbolic factor".into(),
        ));
    }
    let residual = equilibrium_residual(model, eq.value)?;
    if residual.is_nan() || residual > EQUILIBRIUM_TOL {
        return Err(Error::NotAnEquilibrium { residual });
    }
    let x = eq.value[0];
    let r = model.delay();
    let (a_lin, b_lin) = match *model {
        Model::Hyperbolic(p) => {
            let k = p.effective_yield();
            let s = (k - x) / k;
            (-1.0 - x * holling_slope(s, p.a, p.b)?, k * p.response(s)?)
        }
        Model::ChemoLogistic(p) => (-1.0 - p.a * x, p.a * p.effective_yield() - p.a * x),
        Model::Hutchinson(p) => (p.a * p.m - 1.0 - p.a * x, -p.a * x),
        Model::Wright { .. } => (-x, -(1.0 + x)),
        Model::Linear { a_lin, b_lin, .. } => (a_lin, b_lin),
        Model::Chemostat(_) => unreachable!(),
    };
    Ok(Linearization::new(a_lin, b_lin, r))
}

/// Determinant of `lambda I - J_now - J_delayed e^{-lambda r}` for the
/// planar chemostat at an equilibrium `(s, x)`. It factors as
/// `(lambda + 1)` times the characteristic function of the hyperbolic model.
pub fn chemostat_characteristic(
    p: &DimensionlessParams,
    eq: &Equilibrium,
    lambda: Complex64,
) -> Result<Complex64> {
    let (s, x) = (eq.value[0], eq.value[1]);
    let k = p.effective_yield();
    let f = p.response(s)?;
    let df = holling_slope(s, p.a, p.b)?;
    let e = (-lambda * p.r).exp();
    let m11 = lambda + 1.0 + df * x;
    let m12 = Complex64::new(f, 0.0);
    let m21 = -k * df * x * e;
    let m22 = lambda + 1.0 - k * f * e;
    Ok(m11 * m22 - m12 * m21)
}

/// The scalar factor of the chemostat characteristic equation: the
/// linearization of the hyperbolic model at the matching equilibrium.
pub fn hyperbolic_factor(p: &DimensionlessParams, eq: &Equilibrium) -> Result<Linearization> {
    let scalar = Equilibrium {
        kind: eq.kind,
        value: State::scalar(eq.value[eq.value.dim() - 1]),
    };
    linearize(&Model::Hyperbolic(*p), &scalar)
}

/// `r* = arccos(-a/b) / sqrt(b^2 - a^2)`, the smallest delay at which
/// `lambda = i omega` solves the characteristic equation.
pub fn critical_delay(a_lin: f64, b_lin: f64) -> Result<f64> {
    if !(a_lin + b_lin < 0.0 && b_lin < a_lin) {
        return Err(Error::WrongCase(format!(
            "critical delay needs a + b < 0 and b < a, got a = {a_lin}, b = {b_lin}"
        )));
    }
    let omega = (b_lin * b_lin - a_lin * a_lin).sqrt();
    let r_star = (-a_lin / b_lin).clamp(-1.0, 1.0).acos() / omega;
    let lin = Linearization::new(a_lin, b_lin, r_star);
    let res = characteristic(&lin, Complex64::new(0.0, omega)).norm();
    let scale = a_lin.abs().max(b_lin.abs()).max(1.0);
    assert!(
        res <= 1e-10 * scale,
        "i*omega misses the characteristic equation at r* (residual {res:e})"
    );
    Ok(r_star)
}

/// Case of the sign classification, plus the critical delay in case C and the
/// leading root at the linearization's own delay.
pub fn classify(lin: &Linearization) -> Result<StabilityReport> {
    let (a, b) = (lin.a_lin, lin.b_lin);
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite coefficients {lin:?}")));
    }
    let sum = a + b;
    let case = if sum.abs() <= CASE_BOUNDARY_TOL {
        StabilityCase::D
    } else if sum > 0.0 {
        StabilityCase::A
    } else if b >= a {
        StabilityCase::B
    } else {
        StabilityCase::C
    };
    let (critical, omega) = if case == StabilityCase::C {
        (Some(critical_delay(a, b)?), Some((b * b - a * a).sqrt()))
    } else {
        (None, None)
    };
    Ok(StabilityReport {
        case,
        critical_delay: critical,
        omega,
        leading_root: leading_root(lin)?,
    })
}

#[cfg(test)]
mod tests;
