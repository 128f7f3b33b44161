//! Thomas algorithm for tridiagonal systems.

use crate::error::{Error, Result};

/// Pivots below this magnitude are treated as a breakdown.
const PIVOT_FLOOR: f64 = 1e-300;

/// Solves `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
///
/// `lower[0]` and `upper[n-1]` are ignored. No pivoting is done; a vanishing
/// or non-finite pivot is reported as [`Error::PivotBreakdown`].
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; diag.len()];
    let mut scratch = vec![0.0; diag.len()];
    solve_tridiagonal_into(lower, diag, upper, rhs, &mut out, &mut scratch)?;
    Ok(out)
}

/// Allocation-free variant of [`solve_tridiagonal`]; `out` and `scratch`
/// must have the system length.
pub fn solve_tridiagonal_into(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
    out: &mut [f64],
    scratch: &mut [f64],
) -> Result<()> {
    let n = diag.len();
    assert!(
        lower.len() == n && upper.len() == n && rhs.len() == n && out.len() == n && scratch.len() == n,
        "tridiagonal bands must share one length"
    );
    if n == 0 {
        return Ok(());
    }
    let breakdown = |row: usize, pivot: f64| Error::PivotBreakdown {
        row,
        pivot,
        context: format!("system size {n}"),
    };
    let mut pivot = diag[0];
    if !(pivot.abs() > PIVOT_FLOOR) || !pivot.is_finite() {
        return Err(breakdown(0, pivot));
    }
    scratch[0] = upper[0] / pivot;
    out[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * scratch[i - 1];
        if !(pivot.abs() > PIVOT_FLOOR) || !pivot.is_finite() {
            return Err(breakdown(i, pivot));
        }
        scratch[i] = upper[i] / pivot;
        out[i] = (rhs[i] - lower[i] * out[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        out[i] -= scratch[i] * out[i + 1];
    }
    Ok(())
}
