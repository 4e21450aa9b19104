//! Roots of the characteristic equation `lambda = a + b e^{-lambda r}`.
//!
//! The rightmost root is located without any global search:
//!
//! * `b > 0`: `g(l) = l - a - b e^{-l r}` is increasing on the real line and
//!   its single real root dominates every complex root.
//! * `b < 0`: `g` is convex with minimum at `l* = ln(|b| r) / r`. If
//!   `g(l*) <= 0` the larger real root is rightmost. Otherwise the rightmost
//!   roots are a complex pair with imaginary part in `(0, pi/r)`; eliminating
//!   the real part turns the search into a sign change of a real function of
//!   the imaginary part alone, which is bracketed and bisected.
//!
//! Every candidate is Newton-polished in the complex plane, and the claim
//! "nothing lies further right" is cross-checked by an argument-principle
//! count whenever the contour is small enough to trace.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::Linearization;
use crate::error::{Error, Result};

/// Residual bound accepted for a reported root, relative to `max(1, |l|)`.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-10;

/// Vertical-edge pieces above which the argument-principle cross-check is
/// skipped (the exponential term oscillates too fast to trace cheaply).
const MAX_CONTOUR_PIECES: f64 = 200_000.0;

/// `g(l) = l - a - b e^{-l r}`.
pub fn characteristic(lin: &Linearization, lambda: Complex64) -> Complex64 {
    lambda - lin.a_lin - lin.b_lin * (-lambda * lin.delay_r).exp()
}

fn characteristic_slope(lin: &Linearization, lambda: Complex64) -> Complex64 {
    1.0 + lin.b_lin * lin.delay_r * (-lambda * lin.delay_r).exp()
}

/// `|g(l)| / max(1, |l|)`.
pub fn characteristic_residual(lin: &Linearization, lambda: Complex64) -> f64 {
    characteristic(lin, lambda).norm() / lambda.norm().max(1.0)
}

/// The root with maximal real part (upper half plane for a complex pair).
pub fn leading_root(lin: &Linearization) -> Result<Complex64> {
    let (a, b, r) = (lin.a_lin, lin.b_lin, lin.delay_r);
    if !(a.is_finite() && b.is_finite() && r.is_finite() && r >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "non-finite linearization {lin:?}"
        )));
    }
    if r == 0.0 || b == 0.0 {
        return Ok(Complex64::new(a + b, 0.0));
    }

    let root = if b > 0.0 {
        let real = real_root(|x| x - a - b * (-x * r).exp(), a)?;
        polish(lin, Complex64::new(real, 0.0))
    } else {
        let turn = (-b * r).ln() / r;
        let g_turn = turn - a + 1.0 / r;
        if g_turn <= 0.0 {
            let real = if g_turn == 0.0 {
                turn
            } else {
                real_root(|x| x - a - b * (-x * r).exp(), turn)?
            };
            polish(lin, Complex64::new(real, 0.0))
        } else {
            polish(lin, complex_root(a, b, r)?)
        }
    };

    let res = characteristic_residual(lin, root);
    if res.is_nan() || res > ROOT_RESIDUAL_TOL {
        return Err(Error::RootSearch(format!(
            "residual {res:e} at {root} for a = {a}, b = {b}, r = {r}"
        )));
    }
    cross_check(lin, root)?;
    Ok(root)
}

/// Upper bound on the real part of every root: the real root of
/// `x = a + |b| e^{-x r}`.
pub fn real_part_bound(lin: &Linearization) -> Result<f64> {
    let (a, b, r) = (lin.a_lin, lin.b_lin.abs(), lin.delay_r);
    if b == 0.0 || r == 0.0 {
        return Ok(a + b);
    }
    real_root(|x| x - a - b * (-x * r).exp(), a)
}

/// Root of an increasing-through-zero function, given `lo` with `g(lo) <= 0`.
fn real_root(g: impl Fn(f64) -> f64, lo: f64) -> Result<f64> {
    let mut lo = lo;
    let mut step = 1.0;
    let mut hi = lo + step;
    let mut tries = 0;
    while g(hi) <= 0.0 {
        lo = hi;
        step *= 2.0;
        hi = lo + step;
        tries += 1;
        if tries > 200 || !hi.is_finite() {
            return Err(Error::RootSearch("could not bracket the real root".into()));
        }
    }
    Ok(bisect(&g, lo, hi))
}

/// Bisection to adjacent floating-point numbers; `g(lo) <= 0 < g(hi)`.
fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if g(lo).abs() <= g(hi).abs() {
        lo
    } else {
        hi
    }
}

/// Complex pair for `b < 0` when no real root exists. Writing
/// `l = mu + i nu`, the imaginary part of the equation gives
/// `mu(nu) = -ln(nu / (|b| sin(nu r))) / r`, and the real part becomes
/// `h(nu) = mu(nu) - a + nu cot(nu r) = 0`, with `h > 0` near 0 and
/// `h -> -inf` as `nu -> pi/r`.
fn complex_root(a: f64, b: f64, r: f64) -> Result<Complex64> {
    let mu = |nu: f64| -(nu / (-b * (nu * r).sin())).ln() / r;
    let h = |nu: f64| mu(nu) - a + nu / (nu * r).tan();
    let top = PI / r;
    let lo = top * 1e-9;
    let hi = top * (1.0 - 1e-12);
    if !(h(lo) > 0.0 && h(hi) < 0.0) {
        return Err(Error::RootSearch(format!(
            "no sign change of the reduced equation on (0, pi/r) for a = {a}, b = {b}, r = {r}"
        )));
    }
    // h decreases through its zero, so bisect on -h.
    let nu = bisect(|v| -h(v), lo, hi);
    Ok(Complex64::new(mu(nu), nu))
}

/// Newton iteration on the characteristic function, keeping the best iterate.
fn polish(lin: &Linearization, start: Complex64) -> Complex64 {
    let mut best = start;
    let mut best_res = characteristic(lin, start).norm();
    let mut z = start;
    for _ in 0..30 {
        let step = characteristic(lin, z) / characteristic_slope(lin, z);
        if !(step.re.is_finite() && step.im.is_finite()) {
            break;
        }
        z -= step;
        let res = characteristic(lin, z).norm();
        if res < best_res {
            best = z;
            best_res = res;
        }
        if step.norm() <= 1e-16 * z.norm().max(1.0) {
            break;
        }
    }
    // keep the pair convention: report the upper-half-plane member
    if best.im < 0.0 {
        best = best.conj();
    }
    if best.im.abs() <= 1e-300 {
        best.im = 0.0;
    }
    best
}

/// Confirms that no root lies to the right of `root` by counting roots in a
/// box bounded on the left just past `root`.
fn cross_check(lin: &Linearization, root: Complex64) -> Result<()> {
    let left = root.re + 1e-6 * root.re.abs().max(1.0);
    let right = real_part_bound(lin)?.max(left) + 1.0;
    let height = lin.b_lin.abs() * (-left * lin.delay_r).exp() + 1.0;
    if !(height.is_finite()) || 2.0 * height * lin.delay_r / 0.25 > MAX_CONTOUR_PIECES {
        return Ok(());
    }
    let count = count_roots_in_rect(lin, (left, right), (-height, height))?;
    if count != 0 {
        return Err(Error::RootSearch(format!(
            "{count} root(s) found right of {root} for {lin:?}"
        )));
    }
    Ok(())
}

/// Number of characteristic roots inside the rectangle
/// `re.0 < Re l < re.1`, `im.0 < Im l < im.1`, by the argument principle.
/// Fails if a root sits on (or too close to) the contour.
pub fn count_roots_in_rect(lin: &Linearization, re: (f64, f64), im: (f64, f64)) -> Result<i64> {
    if !(re.0 < re.1 && im.0 < im.1) {
        return Err(Error::InvalidArgument("empty rectangle".into()));
    }
    let corners = [
        Complex64::new(re.0, im.0),
        Complex64::new(re.1, im.0),
        Complex64::new(re.1, im.1),
        Complex64::new(re.0, im.1),
    ];
    let g = |z: Complex64| characteristic(lin, z);
    let mut total = 0.0;
    for i in 0..4 {
        let (p, q) = (corners[i], corners[(i + 1) % 4]);
        // the exponential term turns by r per unit of imaginary travel
        let travel = (q - p).norm() * lin.delay_r.max(1e-3);
        let pieces = ((travel / 0.25).ceil() as usize).max(16);
        let mut prev_z = p;
        let mut prev_g = g(p);
        for k in 1..=pieces {
            let z = p + (q - p) * (k as f64 / pieces as f64);
            let gz = g(z);
            total += arg_change(&g, prev_z, z, prev_g, gz, 0)?;
            prev_z = z;
            prev_g = gz;
        }
    }
    let turns = total / (2.0 * PI);
    let count = turns.round();
    if (turns - count).abs() > 0.05 {
        return Err(Error::RootSearch(format!(
            "winding number {turns} is not close to an integer"
        )));
    }
    Ok(count as i64)
}

fn arg_change(
    g: &impl Fn(Complex64) -> Complex64,
    p: Complex64,
    q: Complex64,
    gp: Complex64,
    gq: Complex64,
    depth: u32,
) -> Result<f64> {
    if gp.norm() == 0.0 || gq.norm() == 0.0 {
        return Err(Error::RootSearch("root on the counting contour".into()));
    }
    let whole = (gq / gp).arg();
    let m = 0.5 * (p + q);
    let gm = g(m);
    if gm.norm() == 0.0 {
        return Err(Error::RootSearch("root on the counting contour".into()));
    }
    let first = (gm / gp).arg();
    let second = (gq / gm).arg();
    if whole.abs() < 0.5 && first.abs() < 0.5 && second.abs() < 0.5 && (first + second - whole).abs() < 1e-9 {
        return Ok(whole);
    }
    if depth >= 48 {
        return Err(Error::RootSearch("contour refinement did not converge".into()));
    }
    Ok(arg_change(g, p, m, gp, gm, depth + 1)? + arg_change(g, m, q, gm, gq, depth + 1)?)
}
