//! Randomized invariants of the models, the integrator and the analysis.

use approx::assert_relative_eq;
use chemolab_core::analysis::{
    characteristic_residual, classify, critical_delay, find_equilibrium, leading_root, linearize,
    EquilibriumKind, Linearization, StabilityCase, ROOT_RESIDUAL_TOL,
};
use chemolab_core::dde::{integrate, History, SolverOptions};
use chemolab_core::models::{hutchinson_expanded, hutchinson_product, DimensionlessParams, Model};
use chemolab_core::State;
use proptest::prelude::*;

fn dimensionless() -> impl Strategy<Value = DimensionlessParams> {
    (0.3f64..6.0, 0.0f64..3.0, 0.3f64..5.0, 0.0f64..2.5).prop_map(|(a, b, m, r)| DimensionlessParams {
        a,
        b,
        m,
        r,
    })
}

fn history(r: f64, values: &[f64]) -> History {
    if r == 0.0 {
        return History::constant(State::scalar(*values.last().unwrap()), 0.0).unwrap();
    }
    let n = values.len();
    let knots: Vec<f64> = (0..n).map(|i| -r * (n - 1 - i) as f64 / (n - 1) as f64).collect();
    let states: Vec<State> = values.iter().map(|&v| State::scalar(v)).collect();
    History::piecewise_linear(&knots, &states).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hyperbolic_stays_in_its_band(p in dimensionless(), fr in prop::collection::vec(0.0f64..1.0, 4)) {
        let k = p.effective_yield();
        let vals: Vec<f64> = fr.iter().map(|f| f * k).collect();
        let opts = SolverOptions::for_delay(p.r);
        let traj = integrate(&Model::Hyperbolic(p), &history(p.r, &vals), 30.0, &opts).unwrap();
        for (_, x) in traj.sample(3) {
            prop_assert!(x[0] >= -10.0 * opts.abs_tol && x[0] <= k + 10.0 * opts.abs_tol);
        }
    }

    #[test]
    fn populations_stay_nonnegative(p in dimensionless(), vals in prop::collection::vec(0.0f64..2.0, 4), x0 in 0.01f64..2.0) {
        let mut vals = vals;
        *vals.last_mut().unwrap() = x0;
        let opts = SolverOptions::for_delay(p.r);
        let phi = history(p.r, &vals);
        let growth = (p.a * p.m - 1.0).clamp(0.1, 3.0);
        let hut = DimensionlessParams { m: (1.0 + growth) / p.a, b: 0.0, r: p.r.min(1.0), ..p };
        let hut_phi = history(hut.r, &vals);
        for (model, phi) in [
            (Model::Hyperbolic(p), &phi),
            (Model::ChemoLogistic(p), &phi),
            (Model::Hutchinson(hut), &hut_phi),
        ] {
            if let Model::Hyperbolic(_) = model {
                if vals.iter().any(|&v| v >= p.effective_yield()) {
                    continue;
                }
            }
            let traj = integrate(&model, phi, 20.0, &SolverOptions::for_delay(model.delay())).unwrap();
            for (_, x) in traj.sample(3) {
                prop_assert!(x.min_component() >= -10.0 * opts.abs_tol, "{model:?}");
            }
        }
    }

    #[test]
    fn logistic_limit_of_the_hyperbolic_model(p in dimensionless(), x in -1.0f64..5.0, y in -1.0f64..5.0) {
        let p = DimensionlessParams { b: 0.0, ..p };
        let h = Model::Hyperbolic(p).rhs(State::scalar(x), State::scalar(y)).unwrap()[0];
        let c = Model::ChemoLogistic(p).rhs(State::scalar(x), State::scalar(y)).unwrap()[0];
        assert_relative_eq!(h, c, epsilon = 1e-12, max_relative = 1e-12);
    }

    #[test]
    fn ode_limit_of_the_chemo_logistic_model(p in dimensionless(), x in -1.0f64..5.0) {
        let p = DimensionlessParams { r: 0.0, ..p };
        let growth = p.a * p.m - 1.0;
        let logistic = if growth == 0.0 { -p.a * x * x } else { growth * x * (1.0 - x / (growth / p.a)) };
        let f = Model::ChemoLogistic(p).rhs(State::scalar(x), State::scalar(x)).unwrap()[0];
        assert_relative_eq!(f, logistic, epsilon = 1e-10, max_relative = 1e-10);
    }

    #[test]
    fn hutchinson_forms_agree(p in dimensionless(), x in -1.0f64..5.0, y in -1.0f64..5.0) {
        prop_assume!(p.a * p.m > 1.0 + 1e-9);
        assert_relative_eq!(hutchinson_product(&p, x, y), hutchinson_expanded(&p, x, y), epsilon = 1e-11, max_relative = 1e-11);
    }

    #[test]
    fn zero_delay_root_is_the_coefficient_sum(a in -10.0f64..10.0, b in -10.0f64..10.0) {
        prop_assert_eq!(leading_root(&Linearization::new(a, b, 0.0)).unwrap().re, a + b);
    }

    #[test]
    fn root_sign_matches_the_case(a in -5.0f64..5.0, b in -5.0f64..5.0, r in 0.0f64..10.0) {
        prop_assume!((a + b).abs() > 1e-6 && (a - b).abs() > 1e-6);
        let lin = Linearization::new(a, b, r);
        let rep = classify(&lin).unwrap();
        if let Some(rs) = rep.critical_delay {
            prop_assume!((r - rs).abs() > 1e-6);
        }
        prop_assert!(characteristic_residual(&lin, rep.leading_root) <= ROOT_RESIDUAL_TOL);
        let re = rep.leading_root.re;
        match rep.case {
            StabilityCase::A => prop_assert!(re > 0.0),
            StabilityCase::B => prop_assert!(re < 0.0),
            StabilityCase::C => prop_assert_eq!(re < 0.0, r < rep.critical_delay.unwrap()),
            StabilityCase::D => unreachable!(),
        }
    }

    #[test]
    fn hutchinson_threshold_is_pi_over_two_in_wright_time(a in 0.1f64..10.0, excess in 1e-3f64..20.0, r in 0.0f64..3.0) {
        let p = DimensionlessParams { a, b: 0.0, m: (1.0 + excess) / a, r };
        let model = Model::Hutchinson(p);
        let eq = find_equilibrium(&model, EquilibriumKind::Survival).unwrap();
        let lin = linearize(&model, &eq).unwrap();
        let rs = critical_delay(lin.a_lin, lin.b_lin).unwrap();
        prop_assert!((rs * (a * p.m - 1.0) - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    }
}
