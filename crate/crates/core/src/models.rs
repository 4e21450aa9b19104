//! The delayed chemostat and the scalar equations derived from it.
//!
//! All models are in dimensionless form unless noted. With
//! `k = m e^{-r}` and `f(s) = a s / (1 + b s)`:
//!
//! | family           | right-hand side                                   |
//! |------------------|---------------------------------------------------|
//! | `Chemostat`      | `s' = 1 - s - f(s) x`, `x' = k f(s(t-r)) x(t-r) - x` |
//! | `Hyperbolic`     | `x' = k f((k - x)/k) x(t-r) - x`                  |
//! | `ChemoLogistic`  | `x' = a k x(t-r) - x - a x x(t-r)`                |
//! | `Hutchinson`     | `x' = (am - 1) x (1 - x(t-r) / ((am - 1)/a))`     |
//! | `Wright`         | `xi' = -xi(t-rho) (1 + xi)`                       |
//! | `Linear`         | `x' = a_lin x + b_lin x(t-r)`                     |

use std::fmt;

use crate::dde::DdeSystem;
use crate::error::{Error, Result};
use crate::state::State;

/// Holling type II response `a s / (1 + b s)`.
pub fn holling_response(s: f64, a: f64, b: f64) -> Result<f64> {
    let denom = 1.0 + b * s;
    if denom == 0.0 {
        return Err(Error::Pole { s });
    }
    Ok(a * s / denom)
}

/// Derivative of [`holling_response`] with respect to `s`.
pub fn holling_slope(s: f64, a: f64, b: f64) -> Result<f64> {
    let denom = 1.0 + b * s;
    if denom == 0.0 {
        return Err(Error::Pole { s });
    }
    Ok(a / (denom * denom))
}

/// Chemostat parameters in physical units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DimensionalParams {
    /// Inflow substrate concentration.
    pub c: f64,
    /// Dilution rate.
    pub d: f64,
    /// Search rate.
    pub a: f64,
    /// Handling time.
    pub b: f64,
    /// Conversion factor.
    pub m: f64,
    /// Reproduction delay.
    pub r: f64,
}

impl DimensionalParams {
    pub fn new(c: f64, d: f64, a: f64, b: f64, m: f64, r: f64) -> Result<Self> {
        let p = DimensionalParams { c, d, a, b, m, r };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("C", self.c),
            ("D", self.d),
            ("A", self.a),
            ("B", self.b),
            ("M", self.m),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.r.is_finite() && self.r >= 0.0) {
            return Err(Error::InvalidArgument(format!("R must be >= 0, got {}", self.r)));
        }
        Ok(())
    }

    /// `a = AC/D, b = ABC, m = M, r = DR`.
    pub fn nondimensionalize(&self) -> DimensionlessParams {
        DimensionlessParams {
            a: self.a * self.c / self.d,
            b: self.a * self.b * self.c,
            m: self.m,
            r: self.d * self.r,
        }
    }
}

/// Free function form of [`DimensionalParams::nondimensionalize`].
pub fn nondimensionalize(p: &DimensionalParams) -> DimensionlessParams {
    p.nondimensionalize()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DimensionlessParams {
    pub a: f64,
    pub b: f64,
    pub m: f64,
    pub r: f64,
}

impl DimensionlessParams {
    pub fn new(a: f64, b: f64, m: f64, r: f64) -> Result<Self> {
        let p = DimensionlessParams { a, b, m, r };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.a.is_finite()
            && self.a > 0.0
            && self.m.is_finite()
            && self.m > 0.0
            && self.b.is_finite()
            && self.b >= 0.0
            && self.r.is_finite()
            && self.r >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "need a > 0, b >= 0, m > 0, r >= 0; got {self:?}"
            )))
        }
    }

    /// Effective yield `m e^{-r}` after wash-out during the delay; also the
    /// upper bound of the hyperbolic model.
    pub fn effective_yield(&self) -> f64 {
        self.m * (-self.r).exp()
    }

    pub fn response(&self, s: f64) -> Result<f64> {
        holling_response(s, self.a, self.b)
    }

    /// `f(1) > e^r / m`, i.e. `m e^{-r} f(1) > 1`: the survival state exists.
    pub fn survival_possible(&self) -> bool {
        self.effective_yield() * self.a / (1.0 + self.b) > 1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Chemostat,
    Hyperbolic,
    ChemoLogistic,
    Hutchinson,
    Wright,
    Linear,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Chemostat => "chemostat",
            Family::Hyperbolic => "hyperbolic",
            Family::ChemoLogistic => "chemo-logistic",
            Family::Hutchinson => "hutchinson",
            Family::Wright => "wright",
            Family::Linear => "linear",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One of the model families together with its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Model {
    Chemostat(DimensionlessParams),
    Hyperbolic(DimensionlessParams),
    ChemoLogistic(DimensionlessParams),
    Hutchinson(DimensionlessParams),
    Wright {
        rho: f64,
    },
    /// The linear delay equation `x' = a_lin x + b_lin x(t - r)`.
    Linear {
        a_lin: f64,
        b_lin: f64,
        r: f64,
    },
}

impl Model {
    pub fn family(&self) -> Family {
        match self {
            Model::Chemostat(_) => Family::Chemostat,
            Model::Hyperbolic(_) => Family::Hyperbolic,
            Model::ChemoLogistic(_) => Family::ChemoLogistic,
            Model::Hutchinson(_) => Family::Hutchinson,
            Model::Wright { .. } => Family::Wright,
            Model::Linear { .. } => Family::Linear,
        }
    }

    /// Parameters of the chemostat-derived families.
    pub fn params(&self) -> Option<&DimensionlessParams> {
        match self {
            Model::Chemostat(p) | Model::Hyperbolic(p) | Model::ChemoLogistic(p) | Model::Hutchinson(p) => {
                Some(p)
            }
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Model::Wright { rho } if !(rho.is_finite() && rho >= 0.0) => {
                Err(Error::InvalidArgument(format!("rho must be >= 0, got {rho}")))
            }
            Model::Linear { a_lin, b_lin, r }
                if !(a_lin.is_finite() && b_lin.is_finite() && r.is_finite() && r >= 0.0) =>
            {
                Err(Error::InvalidArgument(
                    "linear model needs finite a_lin, b_lin and r >= 0".into(),
                ))
            }
            _ => self.params().map_or(Ok(()), |p| p.validate()),
        }
    }

    /// Right-hand side at the current and the delayed state.
    pub fn rhs(&self, current: State, delayed: State) -> Result<State> {
        if current.dim() != self.dim() || delayed.dim() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "{} expects {}-dimensional states",
                self.family(),
                self.dim()
            )));
        }
        let v = match *self {
            Model::Chemostat(p) => {
                let (s, x) = (current[0], current[1]);
                let (sd, xd) = (delayed[0], delayed[1]);
                let ds = 1.0 - s - p.response(s)? * x;
                let dx = p.effective_yield() * p.response(sd)? * xd - x;
                return Ok(State::pair(ds, dx));
            }
            Model::Hyperbolic(p) => {
                let k = p.effective_yield();
                let (x, xd) = (current[0], delayed[0]);
                k * p.response((k - x) / k)? * xd - x
            }
            Model::ChemoLogistic(p) => {
                let k = p.effective_yield();
                let (x, xd) = (current[0], delayed[0]);
                p.a * k * xd - x - p.a * x * xd
            }
            Model::Hutchinson(p) => hutchinson_product(&p, current[0], delayed[0]),
            Model::Wright { .. } => -delayed[0] * (1.0 + current[0]),
            Model::Linear { a_lin, b_lin, .. } => a_lin * current[0] + b_lin * delayed[0],
        };
        Ok(State::scalar(v))
    }
}

impl DdeSystem for Model {
    fn dim(&self) -> usize {
        match self {
            Model::Chemostat(_) => 2,
            _ => 1,
        }
    }

    fn delay(&self) -> f64 {
        match *self {
            Model::Wright { rho } => rho,
            Model::Linear { r, .. } => r,
            _ => self.params().map_or(0.0, |p| p.r),
        }
    }

    fn rhs(&self, current: State, delayed: State) -> Result<State> {
        Model::rhs(self, current, delayed)
    }
}

impl Model {
    pub fn dim(&self) -> usize {
        DdeSystem::dim(self)
    }

    pub fn delay(&self) -> f64 {
        DdeSystem::delay(self)
    }
}

/// Hutchinson's equation in product form,
/// `(am - 1) x (1 - x(t-r) / K)` with carrying capacity `K = (am - 1)/a`.
pub fn hutchinson_product(p: &DimensionlessParams, x: f64, xd: f64) -> f64 {
    let growth = p.a * p.m - 1.0;
    let capacity = growth / p.a;
    growth * x * (1.0 - xd / capacity)
}

/// Hutchinson's equation rearranged as `am x - x - a x x(t-r)`, which
/// exposes the non-positive sensitivity `-a x` to the delayed state.
pub fn hutchinson_expanded(p: &DimensionlessParams, x: f64, xd: f64) -> f64 {
    p.a * p.m * x - x - p.a * x * xd
}

/// Restricts the chemostat to the hyperplane where
/// `x(t) + k s(t-r) - k = 0`, giving the scalar hyperbolic model with the
/// same parameters.
pub fn reduce_to_hyperbolic(p: DimensionlessParams) -> Model {
    Model::Hyperbolic(p)
}

/// The delayed chemostat in physical units, used to check the
/// nondimensionalization against direct integration.
#[derive(Clone, Copy, Debug)]
pub struct DimensionalChemostat(pub DimensionalParams);

impl DdeSystem for DimensionalChemostat {
    fn dim(&self) -> usize {
        2
    }

    fn delay(&self) -> f64 {
        self.0.r
    }

    fn rhs(&self, current: State, delayed: State) -> Result<State> {
        let p = &self.0;
        let uptake = |s: f64| -> Result<f64> {
            let denom = 1.0 + p.a * p.b * s;
            if denom == 0.0 {
                return Err(Error::Pole { s });
            }
            Ok(p.a * s / denom)
        };
        let (s, x) = (current[0], current[1]);
        let (sd, xd) = (delayed[0], delayed[1]);
        let ds = p.c * p.d - p.d * s - uptake(s)? * x;
        let dx = p.m * (-p.d * p.r).exp() * uptake(sd)? * xd - p.d * x;
        Ok(State::pair(ds, dx))
    }
}

/// The change of variables taking Hutchinson's equation to Wright's:
/// `tau = (am - 1) t`, `rho = (am - 1) r`, `xi = x / K - 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WrightCoordinates {
    pub time_scale: f64,
    pub rho: f64,
    pub carrying_capacity: f64,
}

impl WrightCoordinates {
    pub fn state(&self, x: f64) -> f64 {
        x / self.carrying_capacity - 1.0
    }

    pub fn state_inverse(&self, xi: f64) -> f64 {
        (xi + 1.0) * self.carrying_capacity
    }

    pub fn time(&self, t: f64) -> f64 {
        self.time_scale * t
    }

    pub fn time_inverse(&self, tau: f64) -> f64 {
        tau / self.time_scale
    }

    pub fn model(&self) -> Model {
        Model::Wright { rho: self.rho }
    }
}

pub fn to_wright(p: &DimensionlessParams) -> Result<WrightCoordinates> {
    let am = p.a * p.m;
    if am <= 1.0 {
        return Err(Error::NoSurvivalState { am });
    }
    let growth = am - 1.0;
    Ok(WrightCoordinates {
        time_scale: growth,
        rho: growth * p.r,
        carrying_capacity: growth / p.a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(a: f64, b: f64, m: f64, r: f64) -> DimensionlessParams {
        DimensionlessParams::new(a, b, m, r).unwrap()
    }

    #[test]
    fn holling_values() {
        assert_eq!(holling_response(0.0, 3.0, 2.0).unwrap(), 0.0);
        assert_eq!(holling_response(1.0, 2.0, 1.0).unwrap(), 1.0);
        assert_eq!(holling_response(0.5, 1.0, 0.0).unwrap(), 0.5);
        assert!(matches!(
            holling_response(-0.5, 1.0, 2.0),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn holling_is_negative_left_of_zero() {
        for s in [-0.4, -0.1, -1e-6] {
            assert!(holling_response(s, 1.5, 2.0).unwrap() < 0.0);
        }
    }

    #[test]
    fn holling_slope_matches_difference_quotient() {
        let (a, b) = (1.7, 0.6);
        for s in [-0.3, 0.0, 0.4, 2.0] {
            let h = 1e-6;
            let fd =
                (holling_response(s + h, a, b).unwrap() - holling_response(s - h, a, b).unwrap()) / (2.0 * h);
            assert!((holling_slope(s, a, b).unwrap() - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn nondimensionalization_examples() {
        let q = DimensionalParams::new(2.0, 0.5, 1.0, 0.25, 3.0, 2.0).unwrap();
        assert_eq!(
            q.nondimensionalize(),
            DimensionlessParams {
                a: 4.0,
                b: 0.5,
                m: 3.0,
                r: 1.0
            }
        );
        let q = DimensionalParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(
            nondimensionalize(&q),
            DimensionlessParams {
                a: 1.0,
                b: 1.0,
                m: 1.0,
                r: 0.0
            }
        );
        assert!(DimensionalParams::new(0.0, 1.0, 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(DimensionalParams::new(1.0, 1.0, 1.0, 1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn param_validation() {
        assert!(DimensionlessParams::new(1.0, 0.0, 1.0, 0.0).is_ok());
        assert!(DimensionlessParams::new(0.0, 0.0, 1.0, 0.0).is_err());
        assert!(DimensionlessParams::new(1.0, -0.1, 1.0, 0.0).is_err());
        assert!(Model::Wright { rho: -1.0 }.validate().is_err());
    }

    #[test]
    fn rhs_examples() {
        let w = Model::Wright { rho: 1.0 };
        assert_eq!(w.rhs(State::scalar(0.0), State::scalar(0.3)).unwrap()[0], -0.3);
        let cl = Model::ChemoLogistic(p(2.0, 0.0, 2.0, 0.0));
        assert_eq!(cl.rhs(State::scalar(1.0), State::scalar(1.0)).unwrap()[0], 1.0);
        assert!(cl.rhs(State::pair(1.0, 1.0), State::pair(1.0, 1.0)).is_err());
    }

    #[test]
    fn chemostat_survival_state_annihilates_rhs() {
        let q = p(3.0, 0.5, 2.0, 0.4);
        let k = q.effective_yield();
        // k a s / (1 + b s) = 1  =>  s = 1 / (k a - b)
        let s = 1.0 / (k * q.a - q.b);
        let x = k * (1.0 - s);
        let st = State::pair(s, x);
        let v = Model::Chemostat(q).rhs(st, st).unwrap();
        assert!(v.max_abs() < 1e-14, "{v:?}");
    }

    #[test]
    fn reduction_keeps_parameters() {
        let q = p(1.3, 0.7, 2.2, 0.9);
        assert_eq!(reduce_to_hyperbolic(q), Model::Hyperbolic(q));
    }

    #[test]
    fn hyperbolic_is_chemostat_on_the_hyperplane() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..200 {
            let q = p(
                rng.gen_range(0.1..5.0),
                rng.gen_range(0.0..3.0),
                rng.gen_range(0.1..5.0),
                rng.gen_range(0.0..3.0),
            );
            let k = q.effective_yield();
            let (x, xd) = (rng.gen_range(0.0..1.0) * k, rng.gen_range(0.0..1.0) * k);
            let s_sub = (k - x) / k;
            let chemo = Model::Chemostat(q)
                .rhs(State::pair(0.5, x), State::pair(s_sub, xd))
                .unwrap()[1];
            let hyper = reduce_to_hyperbolic(q)
                .rhs(State::scalar(x), State::scalar(xd))
                .unwrap()[0];
            assert!((chemo - hyper).abs() <= 1e-14 * (1.0 + chemo.abs()));
        }
    }

    #[test]
    fn hyperbolic_with_linear_response_is_chemo_logistic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let q = p(
                rng.gen_range(0.1..5.0),
                0.0,
                rng.gen_range(0.1..5.0),
                rng.gen_range(0.0..3.0),
            );
            let k = q.effective_yield();
            let x = State::scalar(rng.gen_range(-0.5..1.5) * k);
            let y = State::scalar(rng.gen_range(-0.5..1.5) * k);
            let h = reduce_to_hyperbolic(q).rhs(x, y).unwrap()[0];
            let c = Model::ChemoLogistic(q).rhs(x, y).unwrap()[0];
            assert!((h - c).abs() <= 1e-12 * (1.0 + h.abs()), "{h} vs {c}");
        }
    }

    #[test]
    fn chemo_logistic_without_delay_is_logistic_ode() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let q = p(rng.gen_range(0.5..4.0), 0.0, rng.gen_range(0.5..4.0), 0.0);
            let x = rng.gen_range(0.0..3.0);
            let growth = q.a * q.m - 1.0;
            let expected = growth * x * (1.0 - x / (growth / q.a));
            let got = Model::ChemoLogistic(q)
                .rhs(State::scalar(x), State::scalar(x))
                .unwrap()[0];
            assert!((got - expected).abs() < 1e-12 * (1.0 + expected.abs()));
        }
    }

    #[test]
    fn hutchinson_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let q = p(rng.gen_range(0.2..3.0), 0.0, rng.gen_range(0.5..4.0), 1.0);
            if q.a * q.m <= 1.0 {
                continue;
            }
            let (x, y) = (rng.gen_range(0.0..4.0), rng.gen_range(0.0..4.0));
            let a = hutchinson_product(&q, x, y);
            let b = hutchinson_expanded(&q, x, y);
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn wright_coordinates() {
        let w = to_wright(&p(1.0, 0.0, 2.0, 1.0)).unwrap();
        assert_eq!((w.time_scale, w.rho, w.carrying_capacity), (1.0, 1.0, 1.0));
        let w = to_wright(&p(2.0, 0.0, 2.0, 0.5)).unwrap();
        assert_eq!(w.rho, 1.5);
        assert_eq!(w.state(w.state_inverse(0.25)), 0.25);
        assert!(matches!(
            to_wright(&p(0.5, 0.0, 2.0, 1.0)),
            Err(Error::NoSurvivalState { .. })
        ));
    }

    #[test]
    fn dimensions() {
        let q = p(1.0, 1.0, 1.0, 0.5);
        assert_eq!(Model::Chemostat(q).dim(), 2);
        assert_eq!(Model::Hyperbolic(q).dim(), 1);
        assert_eq!(Model::Hyperbolic(q).delay(), 0.5);
        assert_eq!(Model::Wright { rho: 2.0 }.delay(), 2.0);
    }
}
