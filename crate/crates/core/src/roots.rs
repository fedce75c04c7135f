//! Bracketing and bisection on monotone predicates.
//!
//! Every routine here works on a predicate that is `true` on the left of
//! some threshold and `false` on the right, and returns a point on the
//! `true` side. Callers rely on that: the returned value always satisfies
//! the predicate as evaluated in floating point.

use crate::error::{Error, Result};

/// Absolute tolerance on efforts, per year.
pub const EFFORT_TOL: f64 = 1e-9;
/// Absolute tolerance on catches, tonnes.
pub const CATCH_TOL: f64 = 1.0;
/// Relative floor applied on top of the absolute tolerances.
pub const REL_TOL: f64 = 1e-13;
/// Iteration cap for bisection and for bracket doubling.
pub const MAX_ITERS: usize = 200;

/// Doubles the step from `lo` until `holds` turns false.
///
/// Returns the first point found where the predicate fails.
pub fn bracket_up<F>(lo: f64, mut holds: F) -> Result<f64>
where
    F: FnMut(f64) -> bool,
{
    let mut step = if lo > 0.0 { lo } else { 1.0 };
    for _ in 0..MAX_ITERS {
        let hi = lo + step;
        if !hi.is_finite() {
            break;
        }
        if !holds(hi) {
            return Ok(hi);
        }
        step *= 2.0;
    }
    Err(Error::Numerical(format!(
        "no upper bracket found above {lo}"
    )))
}

/// Largest point of `[lo, hi]` on the `true` side of the threshold.
///
/// `holds(lo)` must be true and `holds(hi)` false; the interval is halved
/// until its width drops under `min(abs_tol, REL_TOL * |hi|)` or stops
/// shrinking in floating point.
pub fn rightmost<F>(mut lo: f64, mut hi: f64, abs_tol: f64, mut holds: F) -> f64
where
    F: FnMut(f64) -> bool,
{
    let tol = abs_tol.min(REL_TOL * hi.abs());
    for _ in 0..MAX_ITERS {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Smallest `x ≥ 0` with `x * biomass ≥ catch` in floating point.
pub fn effort_for_catch(catch: f64, biomass: f64) -> f64 {
    if catch <= 0.0 {
        return 0.0;
    }
    let mut e = catch / biomass;
    while e * biomass < catch {
        e = e.next_up();
    }
    while e > 0.0 && e.next_down() * biomass >= catch {
        e = e.next_down();
    }
    e
}
