use crate::error::{Error, Result};

/// A search interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Domain(format!("bracket requires finite lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Doubles the upper end of `[lo, start]` until `f(hi) >= target`.
///
/// `f` must be nondecreasing. Fails after `max_doublings` attempts.
pub fn grow_bracket<F>(f: F, target: f64, lo: f64, start: f64, max_doublings: u32) -> Result<Bracket>
where
    F: Fn(f64) -> f64,
{
    let mut hi = start;
    for _ in 0..=max_doublings {
        if f(hi) >= target {
            return Bracket::new(lo, hi);
        }
        hi *= 2.0;
    }
    Err(Error::BracketGrowth {
        target,
        doublings: max_doublings,
    })
}

/// Bisection for `f(x) = target` on a monotone `f`.
///
/// Works for increasing or decreasing `f`; the only requirement is that
/// `f(lo) - target` and `f(hi) - target` do not share a sign. Iterates until
/// the live interval is no wider than `tol` and returns its midpoint.
pub fn find_root_monotone<F>(f: F, target: f64, bracket: Bracket, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let Bracket { mut lo, mut hi } = bracket;
    let f_lo = f(lo) - target;
    let f_hi = f(hi) - target;
    if f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::Domain("target function returned NaN at bracket end".into()));
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::InvalidBracket { lo, hi, f_lo, f_hi });
    }

    let lo_negative = f_lo < 0.0;
    let max_iter = ((hi - lo) / tol).log2().ceil().max(0.0) as u32;
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval already at floating-point resolution
            break;
        }
        let fm = f(mid) - target;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
