use std::fmt;

use super::{in_wright_gap, AMPLITUDE_FLOOR};
use crate::analysis::{equilibria, EquilibriumKind};
use crate::dde::{integrate_streaming, History, Segment, SolverOptions};
use crate::error::{Error, Result};
use crate::models::Model;

/// Points per step used to sample the retained part of the run.
const SAMPLES_PER_STEP: usize = 5;

/// Relative spread allowed across the last cycles of a periodic verdict.
const CYCLE_SPREAD: f64 = 0.01;

/// Cycles compared for a periodic verdict.
const CYCLES: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AsymptoticState {
    Washout,
    Survival,
    Periodic,
    Undecided,
}

impl fmt::Display for AsymptoticState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AsymptoticState::Washout => "washout",
            AsymptoticState::Survival => "survival",
            AsymptoticState::Periodic => "periodic",
            AsymptoticState::Undecided => "undecided",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evidence {
    /// Sup-distance to the nearest equilibrium over the terminal window.
    pub terminal_deviation: f64,
    /// Mean half peak-to-peak of the population over the last cycles.
    pub amplitude: Option<f64>,
    /// Mean period over the last cycles.
    pub period: Option<f64>,
    /// Largest relative spread of period and amplitude over the last cycles.
    pub cycle_spread: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticVerdict {
    pub state: AsymptoticState,
    pub evidence: Evidence,
    pub horizon: f64,
}

struct Sample {
    t: f64,
    seg: usize,
    dev_washout: f64,
    dev_survival: f64,
    x: f64,
}

/// Long-time behaviour of a run.
///
/// Convergence is judged on the terminal window of length `10 max(r, 1)`.
/// Oscillations are judged on the second half of the run via upward
/// crossings of the population mean; a periodic verdict needs period and
/// amplitude to agree within 1% over the last three cycles.
pub fn asymptotic_state(
    model: &Model,
    phi: &History,
    horizon: f64,
    tol: f64,
    opts: &SolverOptions,
) -> Result<AsymptoticVerdict> {
    let scale = model.delay().max(1.0);
    if horizon.is_nan() || horizon < 50.0 * scale {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} is shorter than 50 max(r, 1) = {}",
            50.0 * scale
        )));
    }
    let window_start = horizon - 10.0 * scale;
    let keep_from = window_start.min(0.5 * horizon);

    let mut kept: Vec<Segment> = Vec::new();
    integrate_streaming(model, phi, horizon, opts, |seg| {
        if seg.end() >= keep_from {
            kept.push(seg.clone());
        }
    })?;

    let eqs = equilibria(model);
    let target = |kind| eqs.iter().find(|e| e.kind == kind).map(|e| e.value);
    let washout = target(EquilibriumKind::Washout);
    let survival = target(EquilibriumKind::Survival);

    let mut samples = Vec::with_capacity(kept.len() * SAMPLES_PER_STEP + 1);
    for (i, seg) in kept.iter().enumerate() {
        let (a, b) = (seg.start(), seg.end());
        let first = if i == 0 { 0 } else { 1 };
        for j in first..=SAMPLES_PER_STEP {
            let t = a + (b - a) * j as f64 / SAMPLES_PER_STEP as f64;
            let y = seg.eval(t);
            let dev = |v: Option<crate::State>| v.map_or(f64::INFINITY, |v| (y - v).max_abs());
            samples.push(Sample {
                t,
                seg: i,
                dev_washout: dev(washout),
                dev_survival: dev(survival),
                x: y.last(),
            });
        }
    }

    let mut dev_w: f64 = 0.0;
    let mut dev_s: f64 = 0.0;
    for s in samples.iter().filter(|s| s.t >= window_start) {
        dev_w = dev_w.max(s.dev_washout);
        dev_s = dev_s.max(s.dev_survival);
    }
    let terminal_deviation = dev_w.min(dev_s);

    let mut evidence = Evidence {
        terminal_deviation,
        amplitude: None,
        period: None,
        cycle_spread: None,
    };
    let state = if dev_w < tol {
        AsymptoticState::Washout
    } else if dev_s < tol {
        AsymptoticState::Survival
    } else {
        let oscillation = cycles(&samples, &kept, 0.5 * horizon);
        if let Some(c) = oscillation {
            evidence.amplitude = Some(c.amplitude);
            evidence.period = Some(c.period);
            evidence.cycle_spread = Some(c.spread);
        }
        match (oscillation, model) {
            (Some(c), _) if c.spread > CYCLE_SPREAD || c.amplitude <= AMPLITUDE_FLOOR => {
                AsymptoticState::Undecided
            }
            (Some(_), Model::Wright { rho }) if in_wright_gap(*rho) => AsymptoticState::Undecided,
            (Some(_), _) => AsymptoticState::Periodic,
            (None, _) => AsymptoticState::Undecided,
        }
    };
    Ok(AsymptoticVerdict {
        state,
        evidence,
        horizon,
    })
}

#[derive(Clone, Copy, Debug)]
struct Cycles {
    period: f64,
    amplitude: f64,
    spread: f64,
}

fn relative_spread(values: &[f64]) -> (f64, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (
        mean,
        if mean.abs() > 0.0 {
            (hi - lo) / mean.abs()
        } else {
            f64::INFINITY
        },
    )
}

/// Period and amplitude over the last cycles after `from`, or `None` when
/// fewer than three full cycles are visible.
fn cycles(samples: &[Sample], segs: &[Segment], from: f64) -> Option<Cycles> {
    let tail: Vec<&Sample> = samples.iter().filter(|s| s.t >= from).collect();
    if tail.len() < 2 {
        return None;
    }
    let span = tail[tail.len() - 1].t - tail[0].t;
    let area: f64 = tail
        .windows(2)
        .map(|w| 0.5 * (w[0].x + w[1].x) * (w[1].t - w[0].t))
        .sum();
    let mean = area / span;

    let mut crossings = Vec::new();
    let mut marks = Vec::new();
    for (i, w) in tail.windows(2).enumerate() {
        let (p, q) = (w[0], w[1]);
        if p.x - mean < 0.0 && q.x - mean >= 0.0 {
            let t = if p.seg == q.seg {
                refine(&segs[p.seg], p.t, q.t, mean)
            } else {
                p.t + (q.t - p.t) * (mean - p.x) / (q.x - p.x)
            };
            crossings.push(t);
            marks.push(i + 1);
        }
    }
    if crossings.len() < CYCLES + 1 {
        return None;
    }
    let n = crossings.len();
    let periods: Vec<f64> = (n - CYCLES..n).map(|i| crossings[i] - crossings[i - 1]).collect();
    let amplitudes: Vec<f64> = (n - CYCLES..n)
        .map(|i| {
            let part = &tail[marks[i - 1]..marks[i]];
            let hi = part.iter().map(|s| s.x).fold(f64::NEG_INFINITY, f64::max);
            let lo = part.iter().map(|s| s.x).fold(f64::INFINITY, f64::min);
            0.5 * (hi - lo)
        })
        .collect();
    let (period, sp) = relative_spread(&periods);
    let (amplitude, sa) = relative_spread(&amplitudes);
    Some(Cycles {
        period,
        amplitude,
        spread: sp.max(sa),
    })
}

/// Bisection for the upward crossing of `level` inside one step.
fn refine(seg: &Segment, mut lo: f64, mut hi: f64, level: f64) -> f64 {
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if seg.eval(mid).last() < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
