//! Seeded property suites.
//!
//! Every suite draws its scenarios sequentially from a ChaCha8 stream derived
//! from the seed and the suite, then evaluates them as a batch. Reports list
//! cases in draw order, so they are identical for any thread count.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    asymptotic_state, bound_margin, check_order_preservation, lyapunov_v, min_component, AsymptoticState,
    AsymptoticVerdict, VERDICT_TOL,
};
use crate::analysis::{classify, find_equilibrium, leading_root, linearize, EquilibriumKind, Linearization};
use crate::dde::{integrate, History, SolverOptions};
use crate::error::{Error, Result};
use crate::exec;
use crate::models::{DimensionlessParams, Model};
use crate::state::State;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Lyapunov,
    Monotone,
    Dichotomy,
    Bounds,
    Wright,
    All,
}

impl Suite {
    pub const INDIVIDUAL: [Suite; 5] = [
        Suite::Lyapunov,
        Suite::Monotone,
        Suite::Dichotomy,
        Suite::Bounds,
        Suite::Wright,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Lyapunov => "lyapunov",
            Suite::Monotone => "monotone",
            Suite::Dichotomy => "dichotomy",
            Suite::Bounds => "bounds",
            Suite::Wright => "wright",
            Suite::All => "all",
        }
    }

    fn stream(&self) -> u64 {
        match self {
            Suite::Lyapunov => 1,
            Suite::Monotone => 2,
            Suite::Dichotomy => 3,
            Suite::Bounds => 4,
            Suite::Wright => 5,
            Suite::All => 0,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::INDIVIDUAL
            .into_iter()
            .chain([Suite::All])
            .find(|suite| suite.name() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown suite `{s}` (expected lyapunov, monotone, dichotomy, bounds, wright or all)"
                ))
            })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Worker cap; `None` defers to the environment.
    pub threads: Option<usize>,
}

/// Outcome of one property over its batch of cases.
#[derive(Clone, Debug, PartialEq)]
pub struct PropertyReport {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub failures: usize,
    /// What `worst` measures.
    pub metric: String,
    /// Worst value of `metric` over the cases.
    pub worst: f64,
    /// Per-case lines worth keeping (verdicts, first failures).
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub properties: Vec<PropertyReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed)
    }
}

/// Runs one suite, or every suite for [`Suite::All`].
pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> SuiteReport {
    let suites: Vec<Suite> = match suite {
        Suite::All => Suite::INDIVIDUAL.to_vec(),
        s => vec![s],
    };
    let mut properties = Vec::new();
    for s in suites {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(s.stream());
        let t = cfg.threads;
        properties.extend(match s {
            Suite::Lyapunov => vec![lyapunov_identity(&mut rng, 50, t)],
            Suite::Monotone => vec![
                monotone_scalar(&mut rng, Family::Hyperbolic, 100, t),
                monotone_scalar(&mut rng, Family::ChemoLogistic, 100, t),
                hutchinson_order_violation(&mut rng, 200, t),
            ],
            Suite::Dichotomy => dichotomy(&mut rng, 20, t),
            Suite::Bounds => vec![hyperbolic_bounds(&mut rng, 100, t), positivity(&mut rng, 25, t)],
            Suite::Wright => wright_region(&mut rng, t),
            Suite::All => unreachable!(),
        });
    }
    SuiteReport {
        suite,
        seed: cfg.seed,
        properties,
    }
}

#[derive(Clone, Copy, Debug)]
enum Family {
    Hyperbolic,
    ChemoLogistic,
}

/// Per-case result: a metric value (lower is better unless stated) and
/// whether the case passed.
struct Case {
    metric: f64,
    ok: bool,
    note: Option<String>,
}

fn summarize(name: &str, metric: &str, higher_is_worse: bool, cases: Vec<Result<Case>>) -> PropertyReport {
    let total = cases.len();
    let mut failures = 0;
    let mut notes = Vec::new();
    let mut worst = if higher_is_worse {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    };
    for (i, c) in cases.into_iter().enumerate() {
        match c {
            Ok(c) => {
                worst = if higher_is_worse {
                    worst.max(c.metric)
                } else {
                    worst.min(c.metric)
                };
                if !c.ok {
                    failures += 1;
                }
                if let Some(n) = c.note {
                    notes.push(format!("case {i}: {n}"));
                }
            }
            Err(e) => {
                failures += 1;
                notes.push(format!("case {i}: error: {e}"));
            }
        }
    }
    PropertyReport {
        name: name.to_string(),
        passed: failures == 0,
        cases: total,
        failures,
        metric: metric.to_string(),
        worst,
        notes,
    }
}

/// Random piecewise-linear history on `[-r, 0]` with four knots.
fn random_history(rng: &mut ChaCha8Rng, r: f64, lo: &[f64], hi: &[f64]) -> Result<History> {
    let knots = knot_times(r);
    let values: Vec<State> = knots
        .iter()
        .map(|_| {
            let comps: Vec<f64> = lo.iter().zip(hi).map(|(&l, &h)| rng.gen_range(l..h)).collect();
            State::from_slice(&comps)
        })
        .collect();
    history_from(&knots, &values)
}

fn knot_times(r: f64) -> Vec<f64> {
    if r == 0.0 {
        vec![0.0]
    } else {
        vec![-r, -2.0 * r / 3.0, -r / 3.0, 0.0]
    }
}

fn history_from(knots: &[f64], values: &[State]) -> Result<History> {
    if knots.len() == 1 {
        History::constant(values[0], 0.0)
    } else {
        History::piecewise_linear(knots, values)
    }
}

fn chemostat_params(rng: &mut ChaCha8Rng) -> DimensionlessParams {
    DimensionlessParams {
        a: rng.gen_range(0.5..5.0),
        b: rng.gen_range(0.0..2.0),
        m: rng.gen_range(0.5..4.0),
        r: rng.gen_range(0.1..2.0),
    }
}

/// Solver tolerance for the Lyapunov runs. At the default 1e-8 the dense
/// output between nodes is only good to a few 1e-7 for the faster
/// parameter sets, too close to the 1e-6 budget of the identity.
pub const LYAPUNOV_SOLVER_TOL: f64 = 1e-10;

/// `|V(t) - V(0) e^{-t}| <= 1e-6 (1 + |V(0)|)` on `[0, 10]`, starting from a
/// history that is itself a solution segment (one delay of warm-up).
fn lyapunov_identity(rng: &mut ChaCha8Rng, n: usize, threads: Option<usize>) -> PropertyReport {
    let mut jobs = Vec::with_capacity(n);
    for _ in 0..n {
        let p = chemostat_params(rng);
        let phi = random_history(rng, p.r, &[0.0, 0.05], &[1.5, 2.0]);
        jobs.push((p, phi));
    }
    let cases = exec::map(&jobs, threads, |(p, phi)| -> Result<Case> {
        let model = Model::Chemostat(*p);
        let opts = SolverOptions::for_delay(p.r).with_tolerance(LYAPUNOV_SOLVER_TOL);
        let warm = integrate(&model, phi.as_ref().map_err(Clone::clone)?, p.r, &opts)?;
        let traj = integrate(&model, &warm.restart_history(), 10.0, &opts)?;
        let v0 = lyapunov_v(&traj, p, 0.0)?;
        let mut err: f64 = 0.0;
        for i in 0..=2000 {
            let t = 10.0 * i as f64 / 2000.0;
            err = err.max((lyapunov_v(&traj, p, t)? - v0 * (-t).exp()).abs());
        }
        let ratio = err / (1e-6 * (1.0 + v0.abs()));
        Ok(Case {
            metric: ratio,
            ok: ratio <= 1.0,
            note: (ratio > 1.0).then(|| format!("{p:?}: max deviation {err:e}, V(0) = {v0}")),
        })
    });
    summarize(
        "lyapunov identity (50 chemostat runs)",
        "max_t |V(t) - V(0)e^-t| / (1e-6 (1 + |V(0)|))",
        true,
        cases,
    )
}

fn scalar_params(rng: &mut ChaCha8Rng) -> DimensionlessParams {
    DimensionlessParams {
        a: rng.gen_range(0.5..8.0),
        b: rng.gen_range(0.0..3.0),
        m: rng.gen_range(0.5..5.0),
        r: rng.gen_range(0.0..3.0),
    }
}

/// Ordered pair of piecewise-linear histories with values in `[lo, hi]`.
fn ordered_pair(rng: &mut ChaCha8Rng, r: f64, lo: f64, hi: f64) -> Result<(History, History)> {
    let knots = knot_times(r);
    let mut low = Vec::new();
    let mut high = Vec::new();
    for _ in &knots {
        let x = rng.gen_range(lo..hi);
        let y = (x + rng.gen_range(0.0..(hi - lo))).min(hi);
        low.push(State::scalar(x));
        high.push(State::scalar(y));
    }
    Ok((history_from(&knots, &low)?, history_from(&knots, &high)?))
}

fn monotone_scalar(rng: &mut ChaCha8Rng, family: Family, n: usize, threads: Option<usize>) -> PropertyReport {
    let mut jobs = Vec::with_capacity(n);
    for _ in 0..n {
        let p = scalar_params(rng);
        let model = match family {
            Family::Hyperbolic => Model::Hyperbolic(p),
            Family::ChemoLogistic => Model::ChemoLogistic(p),
        };
        let k = p.effective_yield();
        jobs.push((model, ordered_pair(rng, p.r, 0.0, k)));
    }
    let cases = exec::map(&jobs, threads, |(model, pair)| -> Result<Case> {
        let (phi1, phi2) = pair.as_ref().map_err(Clone::clone)?;
        let r = model.delay();
        let opts = SolverOptions::for_delay(r);
        let rep = check_order_preservation(model, phi1, phi2, 50.0 * r.max(1.0), &opts)?;
        Ok(Case {
            metric: rep.margin,
            ok: rep.preserved,
            note: (!rep.preserved)
                .then(|| format!("{model:?}: order lost at t = {:?}", rep.first_violation_t)),
        })
    });
    let name = match family {
        Family::Hyperbolic => "order preservation, hyperbolic (100 pairs)",
        Family::ChemoLogistic => "order preservation, chemo-logistic (100 pairs)",
    };
    summarize(name, "min_t (x2 - x1)", false, cases)
}

/// Random search for an ordered pair whose solutions cross, for the
/// Hutchinson equation with `am - 1 = 2`, `r = 2`. Passes when at least one
/// crossing is found.
fn hutchinson_order_violation(rng: &mut ChaCha8Rng, n: usize, threads: Option<usize>) -> PropertyReport {
    let p = DimensionlessParams {
        a: 1.0,
        b: 0.0,
        m: 3.0,
        r: 2.0,
    };
    let model = Model::Hutchinson(p);
    let jobs: Vec<_> = (0..n).map(|_| ordered_pair(rng, p.r, 0.05, 4.0)).collect();
    let reports = exec::map(&jobs, threads, |pair| {
        let (phi1, phi2) = pair.as_ref().map_err(Clone::clone)?;
        check_order_preservation(&model, phi1, phi2, 100.0, &SolverOptions::for_delay(p.r))
    });
    let mut found = None;
    let mut errors = Vec::new();
    let mut worst = f64::INFINITY;
    for (i, rep) in reports.iter().enumerate() {
        match rep {
            Ok(rep) => {
                worst = worst.min(rep.margin);
                if found.is_none() && !rep.preserved {
                    found = Some((i, rep.first_violation_t));
                }
            }
            Err(e) => errors.push(format!("case {i}: error: {e}")),
        }
    }
    let violations = reports
        .iter()
        .filter(|r| matches!(r, Ok(r) if !r.preserved))
        .count();
    let mut notes = errors;
    notes.push(format!("{violations} of {n} pairs lost their order"));
    if let Some((i, t)) = found {
        notes.push(format!(
            "first violating pair: case {i}, crossing at t = {}",
            t.unwrap_or(f64::NAN)
        ));
    }
    PropertyReport {
        name: "order violation search, hutchinson am-1=2 r=2 (200 pairs)".into(),
        passed: found.is_some(),
        cases: n,
        failures: usize::from(found.is_none()),
        metric: "min over pairs of min_t (x2 - x1)".into(),
        worst,
        notes,
    }
}

/// Hyperbolic parameters with `m e^{-r} f(1) = q`.
fn hyperbolic_with_ratio(rng: &mut ChaCha8Rng, q_lo: f64, q_hi: f64) -> DimensionlessParams {
    let a = rng.gen_range(0.5..5.0);
    let b = rng.gen_range(0.0..2.0);
    let r = rng.gen_range(0.0..2.0);
    let q = rng.gen_range(q_lo..q_hi);
    DimensionlessParams {
        a,
        b,
        m: q * (1.0 + b) * f64::exp(r) / a,
        r,
    }
}

fn verdict_case(v: &AsymptoticVerdict, want: AsymptoticState, label: String) -> Case {
    let ok = v.state == want;
    Case {
        metric: v.evidence.terminal_deviation,
        ok,
        note: (!ok).then(|| format!("{label}: expected {want}, got {} ({:?})", v.state, v.evidence)),
    }
}

/// Survival when `m e^{-r} f(1) > 1`, washout when `< 1`, from positive
/// initial data, judged at horizon `50 max(r, 1)`.
fn dichotomy(rng: &mut ChaCha8Rng, n: usize, threads: Option<usize>) -> Vec<PropertyReport> {
    let mut out = Vec::new();
    for (want, q_lo, q_hi, name) in [
        (
            AsymptoticState::Survival,
            2.0,
            6.0,
            "dichotomy, survival side (20 runs)",
        ),
        (
            AsymptoticState::Washout,
            0.2,
            0.6,
            "dichotomy, washout side (20 runs)",
        ),
    ] {
        let mut jobs = Vec::with_capacity(n);
        for _ in 0..n {
            let p = hyperbolic_with_ratio(rng, q_lo, q_hi);
            let k = p.effective_yield();
            jobs.push((p, random_history(rng, p.r, &[0.05 * k], &[0.95 * k])));
        }
        let cases = exec::map(&jobs, threads, |(p, phi)| -> Result<Case> {
            let phi = phi.as_ref().map_err(Clone::clone)?;
            let model = Model::Hyperbolic(*p);
            let horizon = 50.0 * p.r.max(1.0);
            let v = asymptotic_state(&model, phi, horizon, VERDICT_TOL, &SolverOptions::for_delay(p.r))?;
            Ok(verdict_case(&v, want, format!("{p:?}")))
        });
        out.push(summarize(name, "terminal deviation", true, cases));
    }
    out
}

fn hyperbolic_bounds(rng: &mut ChaCha8Rng, n: usize, threads: Option<usize>) -> PropertyReport {
    let mut jobs = Vec::with_capacity(n);
    for _ in 0..n {
        let p = scalar_params(rng);
        let k = p.effective_yield();
        jobs.push((p, random_history(rng, p.r, &[0.0], &[k])));
    }
    let cases = exec::map(&jobs, threads, |(p, phi)| -> Result<Case> {
        let phi = phi.as_ref().map_err(Clone::clone)?;
        let model = Model::Hyperbolic(*p);
        let opts = SolverOptions::for_delay(p.r);
        let traj = integrate(&model, phi, 50.0 * p.r.max(1.0), &opts)?;
        let margin = bound_margin(&model, &traj, opts.abs_tol)?;
        Ok(Case {
            metric: margin,
            ok: margin >= 0.0,
            note: (margin < 0.0).then(|| format!("{p:?}: left the band by {:e}", -margin)),
        })
    });
    summarize(
        "hyperbolic bounds 0 <= x <= m e^-r (100 runs)",
        "min distance inside [-1e-7, m e^-r + 1e-7]",
        false,
        cases,
    )
}

/// Nonnegative histories with positive current value keep every component
/// above `-10 tol`, for the chemostat and each scalar population model.
fn positivity(rng: &mut ChaCha8Rng, per_family: usize, threads: Option<usize>) -> PropertyReport {
    let mut jobs = Vec::new();
    for family in 0..4 {
        for _ in 0..per_family {
            let job = match family {
                0 => {
                    let p = chemostat_params(rng);
                    (
                        Model::Chemostat(p),
                        random_history(rng, p.r, &[0.0, 0.0], &[1.5, 2.0]),
                    )
                }
                1 => {
                    let p = scalar_params(rng);
                    let k = p.effective_yield();
                    (Model::Hyperbolic(p), random_history(rng, p.r, &[0.0], &[k]))
                }
                2 => {
                    let p = scalar_params(rng);
                    (Model::ChemoLogistic(p), random_history(rng, p.r, &[0.0], &[3.0]))
                }
                _ => {
                    let a = rng.gen_range(0.5..3.0);
                    let am = rng.gen_range(1.1..4.0);
                    let p = DimensionlessParams {
                        a,
                        b: 0.0,
                        m: am / a,
                        r: rng.gen_range(0.0..1.5),
                    };
                    (
                        Model::Hutchinson(p),
                        random_history(rng, p.r, &[0.0], &[2.0 * (am - 1.0) / a]),
                    )
                }
            };
            jobs.push(job);
        }
    }
    let cases = exec::map(&jobs, threads, |(model, phi)| -> Result<Case> {
        let mut phi = phi.as_ref().map_err(Clone::clone)?.clone();
        let r = model.delay();
        if phi.eval(0.0)?.last() <= 0.0 {
            phi = lift_current(&phi, r)?;
        }
        let opts = SolverOptions::for_delay(r);
        let traj = integrate(model, &phi, 50.0 * r.max(1.0), &opts)?;
        let low = min_component(&traj)?;
        let ok = low >= -10.0 * opts.abs_tol;
        Ok(Case {
            metric: low,
            ok,
            note: (!ok).then(|| format!("{model:?}: minimum {low:e}")),
        })
    });
    summarize(
        "positivity, all population models (100 runs)",
        "min over t and components",
        false,
        cases,
    )
}

/// Same history with a small positive population at `t = 0`.
fn lift_current(phi: &History, r: f64) -> Result<History> {
    let knots = knot_times(r);
    let mut values: Vec<State> = knots.iter().map(|&t| phi.eval(t)).collect::<Result<_>>()?;
    let last = values.len() - 1;
    let mut comps = values[last].as_slice().to_vec();
    *comps.last_mut().unwrap() = 0.01;
    values[last] = State::from_slice(&comps);
    history_from(&knots, &values)
}

/// Horizon long enough for a converging Wright run to settle below the
/// verdict tolerance, from the decay rate of the leading root.
pub fn wright_horizon(rho: f64) -> Result<f64> {
    let base = 50.0 * rho.max(1.0);
    let root = leading_root(&Linearization::new(0.0, -1.0, rho))?;
    if root.re < 0.0 {
        let settle = ((1.0 / VERDICT_TOL).ln() + 3.0) / -root.re;
        Ok(base.max(settle.min(250_000.0)).ceil())
    } else {
        Ok(base.max(600.0))
    }
}

fn wright_region(rng: &mut ChaCha8Rng, threads: Option<usize>) -> Vec<PropertyReport> {
    let mut jobs: Vec<(f64, Option<AsymptoticState>)> = vec![
        (0.5, Some(AsymptoticState::Survival)),
        (1.0, Some(AsymptoticState::Survival)),
        (1.5, Some(AsymptoticState::Survival)),
        (1.57, Some(AsymptoticState::Survival)),
        (2.0, Some(AsymptoticState::Periodic)),
        (3.0, Some(AsymptoticState::Periodic)),
    ];
    // Must not come out periodic; survival or undecided are both fine.
    jobs.push((1.5706, None));

    let verdicts = exec::map(&jobs, threads, |&(rho, _)| -> Result<AsymptoticVerdict> {
        let model = Model::Wright { rho };
        let phi = History::constant(State::scalar(0.5), rho)?;
        asymptotic_state(
            &model,
            &phi,
            wright_horizon(rho)?,
            VERDICT_TOL,
            &SolverOptions::for_delay(rho),
        )
    });

    let mut out = Vec::new();
    for ((rho, want), v) in jobs.iter().zip(verdicts) {
        let case = v.map(|v| {
            let (ok, label) = match want {
                Some(w) => (v.state == *w, format!("expected {w}")),
                None => (
                    v.state != AsymptoticState::Periodic,
                    "expected not periodic".to_string(),
                ),
            };
            let mut note = format!(
                "{} at horizon {} ({label}); deviation {:e}",
                v.state, v.horizon, v.evidence.terminal_deviation
            );
            if let (Some(a), Some(p)) = (v.evidence.amplitude, v.evidence.period) {
                note.push_str(&format!(
                    ", amplitude {a:.6}, period {p:.6}, cycle spread {:e}",
                    v.evidence.cycle_spread.unwrap_or(f64::NAN)
                ));
            }
            Case {
                metric: v.evidence.cycle_spread.unwrap_or(v.evidence.terminal_deviation),
                ok,
                note: Some(note),
            }
        });
        let name = match want {
            Some(w) => format!("wright rho = {rho}: {w}"),
            None => format!("wright rho = {rho}: not periodic"),
        };
        let metric = match want {
            Some(AsymptoticState::Periodic) => "cycle spread",
            _ => "terminal deviation",
        };
        out.push(summarize(&name, metric, true, vec![case]));
    }
    out.push(hutchinson_pre_threshold(rng, threads));
    out
}

/// Below `r* = (pi/2)/(am - 1)`, data near the survival state converge to it.
fn hutchinson_pre_threshold(rng: &mut ChaCha8Rng, threads: Option<usize>) -> PropertyReport {
    let p0 = DimensionlessParams {
        a: 1.0,
        b: 0.0,
        m: 3.0,
        r: 0.0,
    };
    let r_star = FRAC_PI_2 / (p0.a * p0.m - 1.0);
    let mut jobs = Vec::new();
    for frac in [0.2, 0.4, 0.6, 0.8, 0.9] {
        let p = DimensionlessParams {
            r: frac * r_star,
            ..p0
        };
        let xbar = (p.a * p.m - 1.0) / p.a;
        jobs.push((p, random_history(rng, p.r, &[0.9 * xbar], &[1.1 * xbar])));
    }
    let cases = exec::map(&jobs, threads, |(p, phi)| -> Result<Case> {
        let phi = phi.as_ref().map_err(Clone::clone)?;
        let model = Model::Hutchinson(*p);
        let eq = find_equilibrium(&model, EquilibriumKind::Survival)
            .ok_or(Error::NoSurvivalState { am: p.a * p.m })?;
        let rate = -classify(&linearize(&model, &eq)?)?.leading_root.re;
        let horizon = (50.0 * p.r.max(1.0))
            .max(((1.0 / VERDICT_TOL).ln() + 3.0) / rate)
            .ceil();
        let v = asymptotic_state(&model, phi, horizon, VERDICT_TOL, &SolverOptions::for_delay(p.r))?;
        Ok(verdict_case(
            &v,
            AsymptoticState::Survival,
            format!("r = {}", p.r),
        ))
    });
    summarize(
        "hutchinson below the critical delay converges (5 runs)",
        "terminal deviation",
        true,
        cases,
    )
}
