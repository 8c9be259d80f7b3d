//! Spectrum slicing helpers shared by the tridiagonal and banded solvers.

use serde::{Deserialize, Serialize};

/// Relative jitter applied to a shift whose factorization hits a zero pivot.
pub const SHIFT_JITTER: f64 = 1e-10;

/// Pivots smaller than this in magnitude are treated as breakdowns.
pub const PIVOT_FLOOR: f64 = 1e-300;

/// Number of generalized eigenvalues below `shift`.
///
/// When the first factorization broke down the count refers to the jittered
/// shift `shift = lambda * (1 + SHIFT_JITTER)` and `perturbed` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftCount {
    pub count: usize,
    pub shift: f64,
    pub perturbed: bool,
}

pub(crate) fn jittered(lambda: f64) -> f64 {
    if lambda == 0.0 {
        SHIFT_JITTER
    } else {
        lambda * (1.0 + SHIFT_JITTER)
    }
}

/// Localizes every eigenvalue in `[lo, hi)` by recursive bisection of the
/// counting function.
///
/// `count(x)` must return the number of eigenvalues below `x`. Each returned
/// value is the midpoint of a bracket of width at most `tol * max(1, |x|)`;
/// clusters narrower than that come back as repeated values. The second
/// component reports whether any count was taken at a jittered shift.
pub fn bisect_all<F>(count: F, lo: f64, hi: f64, tol: f64) -> (Vec<f64>, bool)
where
    F: Fn(f64) -> ShiftCount,
{
    let mut perturbed = false;
    let mut eval = |x: f64| {
        let c = count(x);
        perturbed |= c.perturbed;
        c.count
    };
    let c_lo = eval(lo);
    let c_hi = eval(hi);
    let mut out = Vec::with_capacity(c_hi.saturating_sub(c_lo));
    // Depth-first on the lower half keeps the output sorted.
    let mut stack = vec![(lo, c_lo, hi, c_hi)];
    while let Some((a, ca, b, cb)) = stack.pop() {
        if cb <= ca {
            continue;
        }
        let mid = 0.5 * (a + b);
        if b - a <= tol * mid.abs().max(1.0) || mid <= a || mid >= b {
            out.extend(std::iter::repeat_n(mid, cb - ca));
            continue;
        }
        let cm = eval(mid);
        stack.push((mid, cm, b, cb));
        stack.push((a, ca, mid, cm));
    }
    (out, perturbed)
}

/// Romberg table for values computed at mesh widths `h, h/2, h/4, ...`
/// with an error expansion in even powers of `h`.
///
/// Returns the most extrapolated entry.
pub fn romberg(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "romberg needs at least one level");
    let mut row = values.to_vec();
    let mut factor = 4.0;
    while row.len() > 1 {
        row = row
            .windows(2)
            .map(|w| (factor * w[1] - w[0]) / (factor - 1.0))
            .collect();
        factor *= 4.0;
    }
    row[0]
}
