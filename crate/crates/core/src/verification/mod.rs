//! Numerical checks of the structural properties of the models.
//!
//! The checks work on integrated trajectories and report margins rather than
//! bare booleans, so a failing run shows by how much it failed.

mod asymptotic;
pub mod suites;

use std::f64::consts::FRAC_PI_2;

use crate::dde::{integrate, History, SolverOptions, Trajectory};
use crate::error::{Error, Result};
use crate::models::{DimensionlessParams, Model};

pub use asymptotic::{asymptotic_state, AsymptoticState, AsymptoticVerdict, Evidence};

/// Deviation below which a terminal window counts as converged.
pub const VERDICT_TOL: f64 = 1e-4;

/// Smallest oscillation half-amplitude reported as periodic.
pub const AMPLITUDE_FLOOR: f64 = 1e-3;

/// Lower edge of the Wright delays where neither convergence nor a periodic
/// verdict is forced.
pub const WRIGHT_PROVEN_BOUND: f64 = 1.5706;

/// Interior points per step used when scanning a trajectory.
const SCAN_POINTS: usize = 3;

/// `V(t) = x(t) + k s(t - r) - k` along a chemostat trajectory.
pub fn lyapunov_v(traj: &Trajectory, p: &DimensionlessParams, t: f64) -> Result<f64> {
    if traj.dim() != 2 {
        return Err(Error::InvalidArgument(
            "the Lyapunov functional needs a planar chemostat trajectory".into(),
        ));
    }
    if !(0.0..=traj.t_end()).contains(&t) {
        return Err(Error::OutOfRange {
            t,
            lo: 0.0,
            hi: traj.t_end(),
        });
    }
    let k = p.effective_yield();
    let x = traj.eval(t)?[1];
    let s_delayed = traj.eval(t - p.r)?[0];
    Ok(x + k * s_delayed - k)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderTestReport {
    pub preserved: bool,
    pub first_violation_t: Option<f64>,
    /// Minimum of `x2(t) - x1(t)` over the scanned times.
    pub margin: f64,
}

/// Scan times of a trajectory: every node plus a few interior points per step.
fn scan_times(traj: &Trajectory) -> Vec<f64> {
    let mut out = vec![0.0];
    for seg in traj.steps() {
        let (a, b) = (seg.start(), seg.end());
        for i in 1..=SCAN_POINTS {
            out.push(a + (b - a) * i as f64 / (SCAN_POINTS + 1) as f64);
        }
        out.push(b);
    }
    out
}

fn scalar_model(model: &Model) -> Result<()> {
    if model.dim() != 1 {
        return Err(Error::InvalidArgument(format!(
            "{} is not a scalar model",
            model.family()
        )));
    }
    Ok(())
}

/// Integrates from two ordered histories and measures whether the order
/// survives on `[0, horizon]`.
pub fn check_order_preservation(
    model: &Model,
    phi1: &History,
    phi2: &History,
    horizon: f64,
    opts: &SolverOptions,
) -> Result<OrderTestReport> {
    scalar_model(model)?;
    let mut times: Vec<f64> = phi1.sample(8).into_iter().map(|(t, _)| t).collect();
    times.extend(phi2.sample(8).into_iter().map(|(t, _)| t));
    for &t in &times {
        if phi1.eval(t)?[0] > phi2.eval(t)?[0] {
            return Err(Error::InvalidArgument(format!(
                "initial histories are not ordered at t = {t}"
            )));
        }
    }
    let tr1 = integrate(model, phi1, horizon, opts)?;
    let tr2 = integrate(model, phi2, horizon, opts)?;
    let mut times = scan_times(&tr1);
    times.extend(scan_times(&tr2));
    times.sort_by(f64::total_cmp);
    times.dedup();

    let floor = -10.0 * opts.abs_tol;
    let mut margin = f64::INFINITY;
    let mut first = None;
    for t in times {
        let gap = tr2.eval(t)?[0] - tr1.eval(t)?[0];
        margin = margin.min(gap);
        if first.is_none() && gap < floor {
            first = Some(t);
        }
    }
    Ok(OrderTestReport {
        preserved: margin >= floor,
        first_violation_t: first,
        margin,
    })
}

/// Whether the population stays in `[-10 tol, m e^{-r} + 10 tol]`.
/// Defined for the chemostat, the hyperbolic model and the chemostat-derived
/// logistic model.
pub fn check_bounds(model: &Model, traj: &Trajectory, tol: f64) -> Result<bool> {
    Ok(bound_margin(model, traj, tol)? >= 0.0)
}

/// Signed distance to the violated side of the band (negative when
/// violated).
pub fn bound_margin(model: &Model, traj: &Trajectory, tol: f64) -> Result<f64> {
    let k = match model {
        Model::Chemostat(p) | Model::Hyperbolic(p) | Model::ChemoLogistic(p) => p.effective_yield(),
        _ => {
            return Err(Error::Unsupported(format!(
                "no population bound is defined for the {} family",
                model.family()
            )))
        }
    };
    let (lo, hi) = (-10.0 * tol, k + 10.0 * tol);
    let mut margin = f64::INFINITY;
    for t in scan_times(traj) {
        let x = traj.eval(t)?.last();
        margin = margin.min(x - lo).min(hi - x);
    }
    Ok(margin)
}

/// Smallest component value on `[0, t_end]`.
pub fn min_component(traj: &Trajectory) -> Result<f64> {
    let mut low = f64::INFINITY;
    for t in scan_times(traj) {
        low = low.min(traj.eval(t)?.min_component());
    }
    Ok(low)
}

/// Wright delays where the verdict is never forced to be periodic.
pub fn in_wright_gap(rho: f64) -> bool {
    (WRIGHT_PROVEN_BOUND..=FRAC_PI_2).contains(&rho)
}
