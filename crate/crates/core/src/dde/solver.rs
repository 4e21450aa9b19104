use crate::error::{Error, Result};
use crate::state::State;

use super::history::{History, Segment};
use super::trajectory::Trajectory;

/// An autonomous delay equation `y'(t) = F(y(t), y(t - r))` with a single
/// constant delay.
pub trait DdeSystem {
    fn dim(&self) -> usize;

    fn delay(&self) -> f64;

    fn rhs(&self, current: State, delayed: State) -> Result<State>;
}

impl<T: DdeSystem + ?Sized> DdeSystem for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn delay(&self) -> f64 {
        (**self).delay()
    }

    fn rhs(&self, current: State, delayed: State) -> Result<State> {
        (**self).rhs(current, delayed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Upper bound on the step; the integrator additionally caps it at the
    /// delay so that every stage only reads already computed history.
    pub max_step: f64,
    pub initial_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            max_step: 0.1,
            initial_step: 1e-3,
        }
    }
}

impl SolverOptions {
    /// Defaults with `max_step = min(r, 0.1)` (or 0.1 when `r = 0`).
    pub fn for_delay(r: f64) -> Self {
        let mut opts = SolverOptions::default();
        if r > 0.0 {
            opts.max_step = opts.max_step.min(r);
        }
        opts
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.abs_tol = tol;
        self.rel_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("abs_tol", self.abs_tol),
            ("rel_tol", self.rel_tol),
            ("max_step", self.max_step),
            ("initial_step", self.initial_step),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Outcome of a streaming integration.
#[derive(Clone, Debug)]
pub struct StreamEnd {
    pub final_state: State,
    pub stats: StepStats,
    /// The last delay interval of the solution, re-based to `[-r, 0]`.
    pub tail: History,
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Continuous extension (Hairer, Norsett & Wanner).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

/// Integrates by the method of steps and keeps the whole dense solution.
pub fn integrate<S: DdeSystem + ?Sized>(
    sys: &S,
    phi: &History,
    t_end: f64,
    opts: &SolverOptions,
) -> Result<Trajectory> {
    let mut run = Run::new(sys, phi, t_end, opts)?;
    run.solve(true, |_| {})?;
    let Run {
        store,
        breakpoints,
        stats,
        r,
        ..
    } = run;
    Ok(Trajectory::new(store, breakpoints, stats, r))
}

/// Integrates while retaining only the trailing delay window; every accepted
/// step is handed to `on_step`. Memory stays bounded for long horizons.
pub fn integrate_streaming<S, F>(
    sys: &S,
    phi: &History,
    t_end: f64,
    opts: &SolverOptions,
    on_step: F,
) -> Result<StreamEnd>
where
    S: DdeSystem + ?Sized,
    F: FnMut(&Segment),
{
    let mut run = Run::new(sys, phi, t_end, opts)?;
    run.solve(false, on_step)?;
    let tail = if run.r > 0.0 {
        run.store.tail(run.r)
    } else {
        History::constant(run.y, 0.0)?
    };
    Ok(StreamEnd {
        final_state: run.y,
        stats: run.stats,
        tail,
    })
}

/// Multiples `k r <= t_end` of the delay, starting at 0.
pub(crate) fn breakpoints(r: f64, t_end: f64) -> Vec<f64> {
    if r <= 0.0 {
        return vec![0.0];
    }
    (0..).map(|k| k as f64 * r).take_while(|&t| t <= t_end).collect()
}

struct Run<'a, S: ?Sized> {
    sys: &'a S,
    r: f64,
    t_end: f64,
    atol: f64,
    rtol: f64,
    hmax: f64,
    h: f64,
    t: f64,
    y: State,
    f: State,
    store: History,
    breakpoints: Vec<f64>,
    stats: StepStats,
}

impl<'a, S: DdeSystem + ?Sized> Run<'a, S> {
    fn new(sys: &'a S, phi: &History, t_end: f64, opts: &SolverOptions) -> Result<Self> {
        opts.validate()?;
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "t_end must be finite and > 0, got {t_end}"
            )));
        }
        if phi.dim() != sys.dim() {
            return Err(Error::InvalidArgument(format!(
                "history has dimension {}, model has {}",
                phi.dim(),
                sys.dim()
            )));
        }
        let r = sys.delay();
        let (lo, hi) = phi.span();
        let span_ok = hi == 0.0 && (r == 0.0 || (lo + r).abs() <= 1e-12 * r.max(1.0));
        if !span_ok {
            return Err(Error::InvalidArgument(format!(
                "history must span [-{r}, 0], got [{lo}, {hi}]"
            )));
        }

        let hmax = if r > 0.0 {
            opts.max_step.min(r)
        } else {
            opts.max_step
        };
        let y = phi.eval_unchecked(0.0);
        let mut run = Run {
            sys,
            r,
            t_end,
            atol: opts.abs_tol,
            rtol: opts.rel_tol,
            hmax,
            h: opts.initial_step.min(hmax),
            t: 0.0,
            y,
            f: y,
            store: phi.clone(),
            breakpoints: breakpoints(r, t_end),
            stats: StepStats::default(),
        };
        run.f = run.eval_rhs(0.0, y)?;
        if !run.f.is_finite() {
            return Err(Error::Diverged { t: 0.0 });
        }
        Ok(run)
    }

    fn eval_rhs(&mut self, t: f64, y: State) -> Result<State> {
        self.stats.rhs_evals += 1;
        let delayed = if self.r > 0.0 {
            self.store.eval_unchecked(t - self.r)
        } else {
            y
        };
        self.sys.rhs(y, delayed)
    }

    /// Next time a step must land on exactly: the following breakpoint or
    /// the end of the run.
    fn next_target(&self) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= self.t);
        self.breakpoints
            .get(idx)
            .copied()
            .unwrap_or(self.t_end)
            .min(self.t_end)
    }

    fn solve(&mut self, retain: bool, mut on_step: impl FnMut(&Segment)) -> Result<()> {
        let mut last_rejected = false;
        while self.t < self.t_end {
            let target = self.next_target();
            let proposed = self.h.min(self.hmax);
            let mut h = proposed;
            let mut t_new = self.t + h;
            let clipped = t_new + 0.01 * h >= target;
            if clipped {
                h = target - self.t;
                t_new = target;
            }
            if h <= 1e-13 * self.t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { t: self.t, h });
            }

            let (y1, k7, err, cont) = self.attempt(h)?;
            if !(y1.is_finite() && err.is_finite()) {
                return Err(Error::Diverged { t: self.t });
            }

            if err <= 1.0 {
                let seg = Segment::step(self.t, t_new, self.y, y1, cont);
                on_step(&seg);
                self.store.push(seg);
                self.stats.accepted += 1;
                self.t = t_new;
                self.y = y1;
                self.f = k7;
                if !retain && self.r > 0.0 {
                    self.store.prune_before(self.t - self.r);
                }
                let mut fac = if err == 0.0 {
                    FAC_MAX
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
                };
                if last_rejected {
                    fac = fac.min(1.0);
                }
                self.h = h * fac;
                if clipped {
                    // shortened only to hit a landing target
                    self.h = self.h.max(proposed);
                }
                last_rejected = false;
            } else {
                self.stats.rejected += 1;
                self.h = h * (SAFETY * err.powf(-0.2)).max(FAC_MIN);
                last_rejected = true;
            }
        }
        Ok(())
    }

    /// One Dormand-Prince step from `(t, y)` with FSAL derivative `f`.
    /// Returns the new state, its derivative, the scaled error norm and the
    /// continuous-extension coefficients.
    fn attempt(&mut self, h: f64) -> Result<(State, State, f64, [State; 4])> {
        let (t, y, k1) = (self.t, self.y, self.f);
        let k2 = self.eval_rhs(t + C2 * h, y + (h * A21) * k1)?;
        let k3 = self.eval_rhs(t + C3 * h, y + h * (A31 * k1 + A32 * k2))?;
        let k4 = self.eval_rhs(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3))?;
        let k5 = self.eval_rhs(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))?;
        let k6 = self.eval_rhs(
            t + h,
            y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
        )?;
        let y1 = y + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6);
        if !y1.is_finite() {
            return Err(Error::Diverged { t });
        }
        // The delayed argument of the last stage is already in the store, so
        // the FSAL stage is exact even while the step is still pending.
        let k7 = self.eval_rhs(t + h, y1)?;

        let e = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        let dim = y.dim();
        let sum: f64 = (0..dim)
            .map(|i| {
                let sc = self.atol + self.rtol * y[i].abs().max(y1[i].abs());
                (e[i] / sc).powi(2)
            })
            .sum();
        let err = (sum / dim as f64).sqrt();

        let dy = y1 - y;
        let c1 = h * k1 - dy;
        let c2 = dy - h * k7 - c1;
        let c3 = h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7);
        Ok((y1, k7, err, [dy, c1, c2, c3]))
    }
}
