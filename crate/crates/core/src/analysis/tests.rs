#![allow(clippy::approx_constant)]

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::models::DimensionlessParams;

fn params(a: f64, b: f64, m: f64, r: f64) -> DimensionlessParams {
    DimensionlessParams::new(a, b, m, r).unwrap()
}

/// Principal branch of Lambert W by Halley iteration.
fn lambert_w0(z: Complex64) -> Complex64 {
    let e = std::f64::consts::E;
    let mut w = if (z + 1.0 / e).norm() < 1.0 {
        // branch-point series; the complex sqrt picks the upper sheet for z < -1/e
        let p = (2.0 * (e * z + 1.0)).sqrt();
        -1.0 + p - p * p / 3.0
    } else if z.norm() < 3.0 {
        (1.0 + z).ln()
    } else {
        let l = z.ln();
        l - l.ln()
    };
    for _ in 0..200 {
        let ew = w.exp();
        let f = w * ew - z;
        let step = f / (ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0));
        w -= step;
        if step.norm() <= 1e-15 * w.norm().max(1.0) {
            break;
        }
    }
    w
}

/// Rightmost root from `lambda = a + W0(b r e^{-a r}) / r`.
fn lambert_root(a: f64, b: f64, r: f64) -> Complex64 {
    let z = Complex64::new(b * r * (-a * r).exp(), 0.0);
    let w = lambert_w0(z);
    let root = a + w / r;
    if root.im < 0.0 {
        root.conj()
    } else {
        root
    }
}

fn lin(a: f64, b: f64, r: f64) -> Linearization {
    Linearization::new(a, b, r)
}

#[test]
fn classification_examples() {
    let rep = classify(&lin(-1.0, 0.5, 7.0)).unwrap();
    assert_eq!(rep.case, StabilityCase::B);
    assert!(rep.critical_delay.is_none());
    assert!(rep.leading_root.re < 0.0);

    let rep = classify(&lin(0.0, -1.0, 1.0)).unwrap();
    assert_eq!(rep.case, StabilityCase::C);
    assert!((rep.critical_delay.unwrap() - FRAC_PI_2).abs() < 1e-12);
    assert!((rep.omega.unwrap() - 1.0).abs() < 1e-15);

    assert_eq!(classify(&lin(1.0, -1.0, 3.0)).unwrap().case, StabilityCase::D);
    assert_eq!(
        classify(&lin(1.0, -1.0 + 5e-13, 3.0)).unwrap().case,
        StabilityCase::D
    );
    assert_eq!(classify(&lin(0.3, 0.2, 1.0)).unwrap().case, StabilityCase::A);
    assert!(classify(&lin(f64::NAN, 0.0, 1.0)).is_err());
}

#[test]
fn critical_delay_examples() {
    assert!((critical_delay(0.0, -1.0).unwrap() - 1.5707963268).abs() < 1e-10);
    let r = critical_delay(-0.5, -1.0).unwrap();
    assert!((r - 2.0 * PI / 3.0 / 0.75f64.sqrt()).abs() < 1e-12);
    assert!((r - 2.4184).abs() < 1e-4);
    // hutchinson survival with am - 1 = 2
    assert!((critical_delay(0.0, -2.0).unwrap() - FRAC_PI_4).abs() < 1e-12);
    assert!(matches!(critical_delay(-1.0, 0.5), Err(Error::WrongCase(_))));
    assert!(matches!(critical_delay(0.5, 0.2), Err(Error::WrongCase(_))));
}

#[test]
fn leading_root_examples() {
    let root = leading_root(&lin(0.0, -1.0, FRAC_PI_2)).unwrap();
    assert!(root.re.abs() < 1e-8 && (root.im - 1.0).abs() < 1e-8, "{root}");
    for r in [0.0, 0.3, 5.0] {
        assert_eq!(
            leading_root(&lin(-1.0, 0.0, r)).unwrap(),
            Complex64::new(-1.0, 0.0)
        );
    }
    let root = leading_root(&lin(0.0, -1.0, 1.0)).unwrap();
    assert!(root.re < 0.0);
    let count = count_roots_in_rect(&lin(0.0, -1.0, 1.0), (-0.01, 3.0), (-4.0, 4.0)).unwrap();
    assert_eq!(count, 0);
}

#[test]
fn zero_delay_root_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let (a, b) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        assert_eq!(leading_root(&lin(a, b, 0.0)).unwrap().re, a + b);
    }
}

#[test]
fn frozen_wright_roots() {
    // Rightmost roots of lambda = -e^{-lambda rho}, computed once with an
    // independent Lambert W implementation.
    let cases = [
        (0.5, -1.588, 0.0),
        (1.0, -0.318, 1.337),
        (1.5, -0.02186, 0.0),
        (2.0, 0.0864, 0.837),
        (3.0, 0.1557, 0.0),
    ];
    for (rho, re, im) in cases {
        let root = leading_root(&lin(0.0, -1.0, rho)).unwrap();
        let w = lambert_root(0.0, -1.0, rho);
        assert!((root - w).norm() < 1e-9, "rho {rho}: {root} vs {w}");
        assert!(
            (root.re - re).abs() < 1e-3 * re.abs().max(0.01),
            "rho {rho}: {root}"
        );
        if im != 0.0 {
            assert!((root.im - im).abs() < 1e-3, "rho {rho}: {root}");
        }
    }
}

#[test]
fn matches_lambert_oracle_on_random_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..400 {
        let a = rng.gen_range(-3.0..3.0);
        let b = rng.gen_range(-3.0..3.0);
        let r = rng.gen_range(0.05..6.0);
        let l = lin(a, b, r);
        let root = leading_root(&l).unwrap();
        let w = lambert_root(a, b, r);
        assert!(characteristic_residual(&l, w) < 1e-9, "oracle failed for {l:?}");
        assert!(
            (root.re - w.re).abs() < 1e-9 * w.re.abs().max(1.0),
            "{l:?}: {root} vs {w}"
        );
    }
}

#[test]
fn classifier_agrees_with_root_sign() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 500 {
        let a: f64 = rng.gen_range(-4.0..4.0);
        let b: f64 = rng.gen_range(-4.0..4.0);
        let r = rng.gen_range(0.0..8.0);
        if (a + b).abs() < 1e-6 || (b - a).abs() < 1e-6 {
            continue;
        }
        let rep = classify(&lin(a, b, r)).unwrap();
        if let Some(rs) = rep.critical_delay {
            if (r - rs).abs() < 1e-6 {
                continue;
            }
        }
        let re = rep.leading_root.re;
        let stable = match rep.case {
            StabilityCase::A => false,
            StabilityCase::B => true,
            StabilityCase::C => r < rep.critical_delay.unwrap(),
            StabilityCase::D => unreachable!(),
        };
        assert_eq!(re < 0.0, stable, "a {a} b {b} r {r}: {rep:?}");
        assert!(characteristic_residual(&lin(a, b, r), rep.leading_root) <= ROOT_RESIDUAL_TOL);
        checked += 1;
    }
}

#[test]
fn roots_cross_at_the_critical_delay() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut done = 0;
    while done < 50 {
        let b = rng.gen_range(-4.0..-0.1);
        let a = rng.gen_range(b..-b);
        if !(a + b < -1e-3 && b < a - 1e-3) {
            continue;
        }
        let rs = critical_delay(a, b).unwrap();
        let before = leading_root(&lin(a, b, rs - 1e-6)).unwrap();
        let after = leading_root(&lin(a, b, rs + 1e-6)).unwrap();
        let at = leading_root(&lin(a, b, rs)).unwrap();
        assert!(before.re < 0.0 && after.re > 0.0, "a {a} b {b}: {before} {after}");
        assert!(at.re.abs() < 1e-8, "a {a} b {b}: {at}");
        done += 1;
    }
}

#[test]
fn hutchinson_threshold_scales_to_wright() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let a = rng.gen_range(0.1..5.0);
        let m = rng.gen_range(1.01 / a..10.0 / a);
        let model = Model::Hutchinson(params(a, 0.0, m, 1.0));
        let eq = find_equilibrium(&model, EquilibriumKind::Survival).unwrap();
        let l = linearize(&model, &eq).unwrap();
        let rs = critical_delay(l.a_lin, l.b_lin).unwrap();
        assert!((rs * (a * m - 1.0) - FRAC_PI_2).abs() < 1e-10);
    }
}

#[test]
fn winding_count_finds_known_roots() {
    // b > 0: exactly one real root inside a box around it
    let l = lin(-0.5, 1.2, 1.0);
    let root = leading_root(&l).unwrap();
    let n = count_roots_in_rect(&l, (root.re - 0.1, root.re + 0.1), (-0.1, 0.1)).unwrap();
    assert_eq!(n, 1);
    // Wright past the threshold: one conjugate pair right of the axis
    let l = lin(0.0, -1.0, 2.0);
    let n = count_roots_in_rect(&l, (0.0, 2.0), (-3.0, 3.0)).unwrap();
    assert_eq!(n, 2);
    assert!(count_roots_in_rect(&l, (1.0, 0.0), (0.0, 1.0)).is_err());
}

#[test]
fn hyperbolic_survival_with_logistic_response() {
    let model = Model::Hyperbolic(params(2.0, 0.0, 2.0, 0.0));
    let eq = find_equilibrium(&model, EquilibriumKind::Survival).unwrap();
    assert!((eq.value[0] - 1.5).abs() < 1e-12);
}

#[test]
fn washout_only_below_threshold() {
    // f(1) = 1/2 < e^r / m = e / 1.5
    let p = params(1.0, 1.0, 1.5, 1.0);
    for model in [Model::Hyperbolic(p), Model::Chemostat(p)] {
        let eqs = equilibria(&model);
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].kind, EquilibriumKind::Washout);
    }
    let eq = equilibria(&Model::Hyperbolic(p))[0];
    let rep = classify(&linearize(&Model::Hyperbolic(p), &eq).unwrap()).unwrap();
    assert_eq!(rep.local_behavior(), LocalBehavior::Stable);
}

#[test]
fn chemostat_survival_annihilates_rhs() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut found = 0;
    while found < 100 {
        let p = params(
            rng.gen_range(0.5..10.0),
            rng.gen_range(0.0..3.0),
            rng.gen_range(0.5..5.0),
            rng.gen_range(0.0..2.0),
        );
        let model = Model::Chemostat(p);
        if let Some(eq) = find_equilibrium(&model, EquilibriumKind::Survival) {
            assert!(eq.value[0] > 0.0 && eq.value[0] < 1.0 && eq.value[1] > 0.0);
            assert!(equilibrium_residual(&model, eq.value).unwrap() <= 1e-12);
            found += 1;
        }
    }
}

#[test]
fn linearization_examples() {
    let p = params(1.0, 0.0, 3.0, 2.0);
    let model = Model::Hutchinson(p);
    let wash = find_equilibrium(&model, EquilibriumKind::Washout).unwrap();
    let l = linearize(&model, &wash).unwrap();
    assert_eq!((l.a_lin, l.b_lin, l.delay_r), (2.0, 0.0, 2.0));
    let surv = find_equilibrium(&model, EquilibriumKind::Survival).unwrap();
    let l = linearize(&model, &surv).unwrap();
    assert!(l.a_lin.abs() < 1e-15 && (l.b_lin + 2.0).abs() < 1e-15);

    let wright = Model::Wright { rho: 1.0 };
    let zero = find_equilibrium(&wright, EquilibriumKind::Survival).unwrap();
    let l = linearize(&wright, &zero).unwrap();
    assert_eq!((l.a_lin, l.b_lin), (0.0, -1.0));
    let minus_one = find_equilibrium(&wright, EquilibriumKind::Washout).unwrap();
    let l = linearize(&wright, &minus_one).unwrap();
    assert_eq!((l.a_lin, l.b_lin), (1.0, 0.0));

    let cl = Model::ChemoLogistic(params(2.0, 0.0, 2.0, 0.0));
    let surv = find_equilibrium(&cl, EquilibriumKind::Survival).unwrap();
    assert!((surv.value[0] - 1.5).abs() < 1e-15);
    let rep = classify(&linearize(&cl, &surv).unwrap()).unwrap();
    assert!(rep.leading_root.re < 0.0);
    assert_eq!(rep.leading_root.re, -3.0);

    let chem = Model::Chemostat(p);
    let wash = find_equilibrium(&chem, EquilibriumKind::Washout).unwrap();
    assert!(matches!(linearize(&chem, &wash), Err(Error::Unsupported(_))));
    let bogus = Equilibrium {
        kind: EquilibriumKind::Survival,
        value: State::scalar(0.7),
    };
    assert!(matches!(
        linearize(&model, &bogus),
        Err(Error::NotAnEquilibrium { .. })
    ));
}

/// Numerical partial derivatives of the right-hand side as an independent
/// check of the analytic linearizations.
#[test]
fn linearization_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let p = params(
            rng.gen_range(0.5..6.0),
            rng.gen_range(0.0..2.0),
            rng.gen_range(0.5..5.0),
            rng.gen_range(0.0..1.5),
        );
        let rho = rng.gen_range(0.0..3.0);
        for model in [
            Model::Hyperbolic(p),
            Model::ChemoLogistic(p),
            Model::Hutchinson(p),
            Model::Wright { rho },
        ] {
            for eq in equilibria(&model) {
                let l = linearize(&model, &eq).unwrap();
                let x = eq.value[0];
                let h = 1e-6;
                let f = |u: f64, v: f64| model.rhs(State::scalar(u), State::scalar(v)).unwrap()[0];
                let da = (f(x + h, x) - f(x - h, x)) / (2.0 * h);
                let db = (f(x, x + h) - f(x, x - h)) / (2.0 * h);
                assert!((da - l.a_lin).abs() < 1e-6 * (1.0 + da.abs()), "{model:?} {eq:?}");
                assert!((db - l.b_lin).abs() < 1e-6 * (1.0 + db.abs()), "{model:?} {eq:?}");
            }
        }
    }
}

#[test]
fn chemostat_characteristic_factors() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut n = 0;
    while n < 50 {
        let p = params(
            rng.gen_range(0.5..10.0),
            rng.gen_range(0.0..3.0),
            rng.gen_range(0.5..5.0),
            rng.gen_range(0.0..2.0),
        );
        let Some(eq) = find_equilibrium(&Model::Chemostat(p), EquilibriumKind::Survival) else {
            continue;
        };
        let factor = hyperbolic_factor(&p, &eq).unwrap();
        for _ in 0..10 {
            let z = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-5.0..5.0));
            let det = chemostat_characteristic(&p, &eq, z).unwrap();
            let product = (z + 1.0) * characteristic(&factor, z);
            assert!(
                (det - product).norm() < 1e-10 * (1.0 + det.norm()),
                "{det} vs {product}"
            );
        }
        n += 1;
    }
}
