//! Bracketing scalar root finding.
//!
//! Every root-find in the crate is on a function known to change sign on
//! the bracket, so Brent's method (inverse quadratic interpolation with a
//! bisection fallback) is used throughout. Termination is at the bracket
//! width `2·eps·|x| + abs_tol`, which with `abs_tol = 0` runs to full
//! double precision.

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 500;

/// Finds a root of `f` in `[lo, hi]`. `f(lo)` and `f(hi)` must not share a sign.
pub fn brent<F>(mut f: F, lo: f64, hi: f64, abs_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::domain(format!(
            "root not bracketed on [{lo}, {hi}]: f = ({fa}, {fb})"
        )));
    }

    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITERATIONS {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * abs_tol;
        let half = 0.5 * (c - b);
        if half.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * half * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * half * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let interp_limit = 3.0 * half * q - (tol * q).abs();
            if 2.0 * p < interp_limit.min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = half;
                e = d;
            }
        } else {
            d = half;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(half) };
        fb = f(b);
    }
    Err(Error::NonConvergence {
        context: "brent root-find".into(),
        iterations: MAX_ITERATIONS,
        residual: fb.abs(),
        best: None,
    })
}

/// Grows `hi` geometrically from `start` until `f(hi)` has the opposite sign
/// of `f(lo)`. Returns the first such `hi`.
pub fn expand_upward<F>(mut f: F, lo: f64, start: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let sign_lo = f(lo).signum();
    let mut hi = start.max(lo + f64::MIN_POSITIVE);
    for _ in 0..2048 {
        let v = f(hi);
        if v == 0.0 || v.signum() != sign_lo {
            return Ok(hi);
        }
        if !hi.is_finite() {
            break;
        }
        hi *= 2.0;
    }
    Err(Error::domain(format!(
        "could not bracket a root above {lo} starting from {start}"
    )))
}
