//! Homogeneities of cone solutions and of the regular-point blow-up for the
//! maximal Pucci operator with ratio `omega = Lambda / lambda`.
//!
//! Throughout, `alpha` is the excess over linear growth: a blow-up profile is
//! homogeneous of degree `beta = 1 + alpha`.
//!
//! The cone functions are
//!
//! ```text
//! g(a, w) = atan(sqrt w)     + (1 - a) / sqrt((a + 1/w)(a + w)) * atan(sqrt(w (a + 1/w) / (a + w)))
//! h(a, w) = atan(1 / sqrt w) + (1 - a) / sqrt((a + 1/w)(a + w)) * atan(sqrt((a + w) / (w (a + 1/w))))
//! ```
//!
//! A negative (resp. positive) solution in a cone of aperture `theta` has
//! homogeneity `1 + a` with `g(a, w) = theta / 2` (resp. `h(a, w) = theta / 2`).
//! The blow-up splits the circle into negative/positive/negative sectors of
//! apertures `2g, 2h, 2g`, whence `2g + h = pi`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::roots::bisect;

fn common_factor(alpha: f64, omega: f64) -> f64 {
    (1.0 - alpha) / ((alpha + 1.0 / omega) * (alpha + omega)).sqrt()
}

/// Half-aperture of the cone carrying a negative `(1 + alpha)`-homogeneous solution.
pub fn g(alpha: f64, omega: f64) -> f64 {
    let ratio = omega * (alpha + 1.0 / omega) / (alpha + omega);
    omega.sqrt().atan() + common_factor(alpha, omega) * ratio.sqrt().atan()
}

/// Half-aperture of the cone carrying a positive `(1 + alpha)`-homogeneous solution.
pub fn h(alpha: f64, omega: f64) -> f64 {
    let ratio = (alpha + omega) / (omega * (alpha + 1.0 / omega));
    (1.0 / omega.sqrt()).atan() + common_factor(alpha, omega) * ratio.sqrt().atan()
}

/// `2 g(alpha, omega) + h(alpha, omega) - pi`.
pub fn master_equation(alpha: f64, omega: f64) -> f64 {
    2.0 * g(alpha, omega) + h(alpha, omega) - PI
}

/// The master equation in the variable `x = 1/sqrt(omega)`:
/// `F(x, a) = (1-a) x / sqrt((a + x^2)(a x^2 + 1)) * (pi/2 + atan(sqrt((a + x^2)/(a x^2 + 1)))) - atan(x)`.
pub fn master_f(x: f64, alpha: f64) -> Result<f64> {
    check_reduced(x, alpha)?;
    let p = alpha + x * x;
    let q = alpha * x * x + 1.0;
    Ok((1.0 - alpha) * x / (p * q).sqrt() * (FRAC_PI_2 + (p / q).sqrt().atan()) - x.atan())
}

/// `G(x, a) = sqrt((a + x^2)(a x^2 + 1)) / ((1 - a) x) * F(x, a)`, extended to
/// `x = 0` by its limit `pi/2 + atan(sqrt a) - sqrt(a) / (1 - a)`.
///
/// Evaluated in the expanded form
/// `pi/2 + atan(sqrt(p/q)) - sqrt(p q) atan(x) / ((1 - a) x)`, which has no
/// cancellation as `x -> 0`.
pub fn master_g(x: f64, alpha: f64) -> Result<f64> {
    check_reduced(x, alpha)?;
    let p = alpha + x * x;
    let q = alpha * x * x + 1.0;
    // atan(x)/x with its Taylor series near zero.
    let atan_ratio = if x < 1e-4 { 1.0 - x * x / 3.0 + x.powi(4) / 5.0 } else { x.atan() / x };
    Ok(FRAC_PI_2 + (p / q).sqrt().atan() - (p * q).sqrt() * atan_ratio / (1.0 - alpha))
}

fn check_reduced(x: f64, alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return param(format!("x must lie in [0, 1], got {x}"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return param(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    Ok(())
}

/// Whether a cone solution is positive or negative inside the cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    /// Aperture in radians, in `(0, pi]`.
    pub aperture: f64,
    pub sign: Sign,
    pub omega: f64,
}

/// Homogeneity `beta >= 1` of the signed solution of `P+_{1,omega}(D^2 u) = 0`
/// vanishing on the boundary of the cone. Half-planes give `beta = 1`.
pub fn cone_homogeneity(spec: ConeSpec) -> Result<f64> {
    let ConeSpec { aperture, sign, omega } = spec;
    if !(aperture > 0.0 && aperture <= PI) {
        return param(format!("cone aperture must lie in (0, pi], got {aperture}"));
    }
    check_omega(omega)?;
    if aperture == PI {
        return Ok(1.0);
    }
    let half = 0.5 * aperture;
    let side = |a: f64| match sign {
        Sign::Negative => g(a, omega) - half,
        Sign::Positive => h(a, omega) - half,
    };
    // Both half-apertures decrease from pi/2 (a = 0) towards 0 as a grows.
    let mut hi = 1.0;
    while side(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return param(format!("cone aperture {aperture} too small to bracket"));
        }
    }
    let root = bisect(side, 0.0, hi, 0.0, 0.0)?;
    Ok(1.0 + root.x)
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega >= 1.0 && omega.is_finite()) {
        return param(format!("omega must be finite and >= 1, got {omega}"));
    }
    Ok(())
}

/// Regular-point exponent together with its root-finding diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentResult {
    pub alpha: f64,
    pub omega: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl ExponentResult {
    pub fn homogeneity(&self) -> f64 {
        1.0 + self.alpha
    }
}

// Bisection stops once the residual is within a few ulps of pi.
const RESIDUAL_FLOOR: f64 = 1e-15;

/// `alpha(omega)`, the unique root of `2g + h = pi` in `(0, 1)`.
pub fn alpha_pucci(omega: f64) -> Result<ExponentResult> {
    check_omega(omega)?;
    let root = bisect(|a| master_equation(a, omega), 0.0, 1.0, 0.0, RESIDUAL_FLOOR)?;
    Ok(ExponentResult { alpha: root.x, omega, residual: root.residual, iterations: root.iterations })
}

/// Limit `alpha(inf)`: the root in `(0, 1)` of
/// `2 sqrt(a) = (1 - a)(pi + 2 atan(sqrt a))`.
pub fn alpha_infinity() -> ExponentResult {
    let root =
        bisect(alpha_infinity_equation, 0.0, 1.0, 1e-14, 0.0).expect("the limiting equation changes sign on [0, 1]");
    ExponentResult { alpha: root.x, omega: f64::INFINITY, residual: root.residual, iterations: root.iterations }
}

/// `2 sqrt(a) - (1 - a)(pi + 2 atan(sqrt a))`.
pub fn alpha_infinity_equation(alpha: f64) -> f64 {
    let s = alpha.sqrt();
    2.0 * s - (1.0 - alpha) * (PI + 2.0 * s.atan())
}

/// `alpha_pucci` over an ascending list of ratios. `inf` maps to
/// [`alpha_infinity`].
pub fn alpha_table(omegas: &[f64]) -> Result<Vec<ExponentResult>> {
    if omegas.windows(2).any(|w| !(w[1] > w[0])) {
        return param("omega list must be strictly ascending");
    }
    omegas.iter().map(|&w| if w == f64::INFINITY { Ok(alpha_infinity()) } else { alpha_pucci(w) }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_and_h_closed_forms() {
        for w in [1.0, 2.0, 7.5, 100.0] {
            assert_eq!(g(1.0, w), w.sqrt().atan());
            assert_eq!(h(1.0, w), (1.0 / w.sqrt()).atan());
        }
        assert!((g(0.5, 1.0) - PI / 3.0).abs() < 1e-15);
        assert!((h(0.5, 1.0) - PI / 3.0).abs() < 1e-15);
        for a in [0.0, 0.3, 1.0, 2.5] {
            assert!((g(a, 1.0) - FRAC_PI_2 / (1.0 + a)).abs() < 1e-15);
            assert!((h(a, 1.0) - FRAC_PI_2 / (1.0 + a)).abs() < 1e-15);
        }
    }

    #[test]
    fn g_and_h_monotonicity() {
        for w in [1.0, 2.0, 10.0] {
            for k in 0..100 {
                let (a, b) = (k as f64 / 100.0, (k + 1) as f64 / 100.0);
                assert!(g(b, w) < g(a, w));
                assert!(h(b, w) < h(a, w));
            }
        }
        for a in [0.1, 0.5, 0.9] {
            for k in 0..50 {
                let (w0, w1) = (1.0 + k as f64 * 0.2, 1.2 + k as f64 * 0.2);
                assert!(g(a, w1) > g(a, w0));
                assert!(h(a, w1) < h(a, w0));
            }
        }
    }

    #[test]
    fn master_equation_signs() {
        assert!(master_equation(0.5, 1.0).abs() < 1e-15);
        for w in [1.5, 2.0, 10.0] {
            let v = master_equation(1.0, w);
            assert!(v < 0.0);
            assert!((v - (2.0 * w.sqrt().atan() + (1.0 / w.sqrt()).atan() - PI)).abs() < 1e-15);
            let mut prev = f64::INFINITY;
            for k in 0..=100 {
                let m = master_equation(k as f64 / 100.0, w);
                assert!(m < prev);
                prev = m;
            }
        }
    }

    #[test]
    fn alpha_at_one_is_one_half() {
        let r = alpha_pucci(1.0).unwrap();
        assert_eq!(r.alpha, 0.5);
        assert!(r.residual.abs() <= 1e-12);
        assert!(alpha_pucci(0.5).is_err());
        assert!(alpha_pucci(f64::INFINITY).is_err());
    }

    #[test]
    fn alpha_infinity_value() {
        let r = alpha_infinity();
        assert!((r.alpha - 0.64306995).abs() < 5e-9, "{}", r.alpha);
        assert!(r.residual.abs() <= 1e-12);
        let g0 = bisect(|a| master_g(0.0, a).unwrap(), 0.01, 0.99, 0.0, 0.0).unwrap();
        assert!((g0.x - r.alpha).abs() < 1e-10);
        let far = alpha_pucci(1e8).unwrap();
        assert!((far.alpha - r.alpha).abs() < 1e-4);
    }

    #[test]
    fn reduced_functions_anchors() {
        for a in [0.1, 0.5, 0.77] {
            assert_eq!(master_f(0.0, a).unwrap(), 0.0);
            let f1 = master_f(1.0, a).unwrap();
            assert!((f1 - FRAC_PI_2 * (1.0 - 2.0 * a) / (1.0 + a)).abs() < 1e-14);
            let g1 = master_g(1.0, a).unwrap();
            assert!((g1 - FRAC_PI_2 * (1.0 - 2.0 * a) / (1.0 - a)).abs() < 1e-14);
            let g0 = master_g(0.0, a).unwrap();
            let s = a.sqrt();
            assert!((g0 - (FRAC_PI_2 + s.atan() - s / (1.0 - a))).abs() < 1e-15);
            // Continuity of the extension at x = 0.
            assert!((master_g(1e-6, a).unwrap() - g0).abs() < 1e-9);
        }
        assert!(master_f(0.5, 1.0).is_err());
        assert!(master_g(1.5, 0.5).is_err());
    }

    #[test]
    fn reduced_form_root_matches_alpha() {
        for w in [1.5, 2.0, 4.0, 25.0] {
            let x = 1.0 / f64::sqrt(w);
            let a = alpha_pucci(w).unwrap().alpha;
            assert!(master_f(x, a).unwrap().abs() < 1e-12);
            let via_g = bisect(|t| master_g(x, t).unwrap(), 1e-6, 1.0 - 1e-9, 0.0, 0.0).unwrap();
            assert!((via_g.x - a).abs() < 1e-12);
        }
    }

    #[test]
    fn cone_homogeneity_cases() {
        for sign in [Sign::Positive, Sign::Negative] {
            for w in [1.0, 3.0] {
                assert_eq!(cone_homogeneity(ConeSpec { aperture: PI, sign, omega: w }).unwrap(), 1.0);
            }
            for theta in [0.3, 1.0, 2.0, 3.0] {
                let b = cone_homogeneity(ConeSpec { aperture: theta, sign, omega: 1.0 }).unwrap();
                assert!((b - PI / theta).abs() < 1e-12);
            }
        }
        let spec = ConeSpec { aperture: 1.3, sign: Sign::Negative, omega: 2.5 };
        let b = cone_homogeneity(spec).unwrap();
        assert!((g(b - 1.0, 2.5) - 0.65).abs() < 1e-12);
        assert!(cone_homogeneity(ConeSpec { aperture: 4.0, ..spec }).is_err());
        assert!(cone_homogeneity(ConeSpec { aperture: 0.0, ..spec }).is_err());
    }

    #[test]
    fn table_is_increasing() {
        let t = alpha_table(&[1.0, 2.0, 4.0, 10.0, 100.0]).unwrap();
        let inf = alpha_infinity().alpha;
        assert_eq!(t[0].alpha, 0.5);
        for w in t.windows(2) {
            assert!(w[1].alpha - w[0].alpha > 1e-10);
        }
        assert!(t.iter().all(|r| r.alpha < inf));
        assert!(alpha_table(&[2.0, 1.0]).is_err());
        assert!(alpha_table(&[1.0, 1.0]).is_err());
    }
}
