//! Scalar bisection shared by the exponent and operator routines.

use crate::error::{Error, Result};

/// Upper bound on bisection steps; 200 halvings exhaust any f64 bracket.
pub const MAX_BISECTION_STEPS: usize = 200;

/// A bracketed root together with the function value there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Plain bisection on `[lo, hi]`.
///
/// Stops when `f(mid)` is exactly zero, when `|f(mid)| <= f_tol`, or when the
/// bracket can no longer be split in floating point (or is narrower than
/// `x_tol`). Returns the endpoint or midpoint with the smallest `|f|` seen at
/// the final bracket.
pub fn bisect<F>(f: F, lo: f64, hi: f64, x_tol: f64, f_tol: f64) -> Result<Root>
where
    F: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(Root { x: lo, residual: 0.0, iterations: 0 });
    }
    if f_hi == 0.0 {
        return Ok(Root { x: hi, residual: 0.0, iterations: 0 });
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return Err(Error::NotBracketed { lo, hi, f_lo, f_hi });
    }
    let mut best = if f_lo.abs() < f_hi.abs() {
        Root { x: lo, residual: f_lo, iterations: 0 }
    } else {
        Root { x: hi, residual: f_hi, iterations: 0 }
    };
    for it in 1..=MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            best.iterations = it;
            return Ok(best);
        }
        let f_mid = f(mid);
        if f_mid.abs() <= best.residual.abs() {
            best = Root { x: mid, residual: f_mid, iterations: it };
        }
        if f_mid == 0.0 || f_mid.abs() <= f_tol || hi - lo <= x_tol {
            return Ok(Root { x: mid, residual: f_mid, iterations: it });
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    best.iterations = MAX_BISECTION_STEPS;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 0.0, 0.0).unwrap();
        assert!((r.x - 2f64.sqrt()).abs() < 1e-15);
        assert!(r.residual.abs() < 1e-15);
    }

    #[test]
    fn exact_endpoint() {
        let r = bisect(|x| x - 1.0, 1.0, 3.0, 0.0, 0.0).unwrap();
        assert_eq!(r.x, 1.0);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn rejects_unbracketed() {
        assert!(matches!(bisect(|x| x * x + 1.0, -1.0, 1.0, 0.0, 0.0), Err(Error::NotBracketed { .. })));
    }
}
