//! Safeguarded scalar root finding: bisection down to a narrow bracket, then
//! Newton steps with a central-difference derivative that never leave it.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub(crate) struct RootOptions {
    /// Bisection stops once the bracket is narrower than this (relative to
    /// the larger endpoint magnitude, floored at 1).
    pub bracket_width: f64,
    pub residual_tol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            bracket_width: 1e-6,
            residual_tol: 1e-12,
            max_iter: 200,
        }
    }
}

/// Root of `f` in `[lo, hi]`, which must bracket a sign change.
pub(crate) fn bracketed_root<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    opts: RootOptions,
) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::RootNotBracketed(format!(
            "non-finite values at bracket ends f({lo}) = {flo}, f({hi}) = {fhi}"
        )));
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::RootNotBracketed(format!(
            "f({lo}) = {flo} and f({hi}) = {fhi} have the same sign"
        )));
    }

    let mut iter = 0;
    let scale = |a: f64, b: f64| a.abs().max(b.abs()).max(1.0);
    while hi - lo > opts.bracket_width * scale(lo, hi) && iter < opts.max_iter {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        iter += 1;
    }

    let mut x = 0.5 * (lo + hi);
    let mut best = (f(x).abs(), x);
    while iter < opts.max_iter {
        let fx = f(x);
        if fx.abs() < best.0 {
            best = (fx.abs(), x);
        }
        if fx.abs() < opts.residual_tol {
            return Ok(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        let step = 1e-7 * x.abs().max(1e-300);
        let deriv = (f(x + step) - f(x - step)) / (2.0 * step);
        let mut next = x - fx / deriv;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if next == x {
            break;
        }
        x = next;
        iter += 1;
    }
    // Bracket collapsed to adjacent floats: the residual floor is roundoff.
    if hi - lo <= 4.0 * f64::EPSILON * scale(lo, hi) {
        return Ok(best.1);
    }
    Err(Error::RootNotBracketed(format!(
        "no convergence after {} iterations (best residual {:e} at {})",
        opts.max_iter, best.0, best.1
    )))
}
