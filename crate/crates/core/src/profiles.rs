//! Homogeneous blow-up profiles of the maximal Pucci operator.
//!
//! A function `u = r^beta phi(theta)` solves `P+_{1,omega}(D^2 u) = 0` where
//! `phi'' = angular_rhs(beta, omega, phi, phi')`. Angles are measured
//! counterclockwise from the slit `{x2 = 0, x1 < 0}`, so that
//! `x1 = -r cos(theta)` and `x2 = r sin(theta)`; the positive `x1`-axis sits at
//! `theta = pi`.
//!
//! The profile is assembled from three sectors: negative on `(0, theta1)`,
//! positive on `(theta1, theta2)` and negative on `(theta2, 2 pi)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{alpha_pucci, g, h, Sign};
use crate::operators::{pucci_plus, EllipticityPair, SymMat2};
use crate::roots::bisect;

/// Angular steps per `pi` used by [`shoot_sector`].
pub const STEPS_PER_PI: usize = 16384;

const MAX_BRACKET_DOUBLINGS: usize = 60;

/// Hessian of `r^beta phi(theta)` at `r = 1` in the radial/tangential frame.
pub fn hessian_of_homogeneous(beta: f64, phi: f64, phi_p: f64, phi_pp: f64) -> SymMat2 {
    SymMat2::new(beta * (beta - 1.0) * phi, (beta - 1.0) * phi_p, beta * phi + phi_pp)
}

/// Solves `P+_{1,omega}(hessian_of_homogeneous(beta, phi, phi_p, x)) = 0` for `x`.
pub fn angular_rhs(beta: f64, omega: f64, phi: f64, phi_p: f64) -> Result<f64> {
    let ell = EllipticityPair::unit(omega)?;
    let f = |x: f64| pucci_plus(&hessian_of_homogeneous(beta, phi, phi_p, x), ell);
    let scale = beta * beta * phi.abs() + beta * phi_p.abs();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (-scale, scale);
    let mut doublings = 0;
    while f(lo) > 0.0 || f(hi) < 0.0 {
        doublings += 1;
        if doublings > MAX_BRACKET_DOUBLINGS {
            return Err(Error::Numerical(format!(
                "angular equation not bracketed after {MAX_BRACKET_DOUBLINGS} doublings"
            )));
        }
        lo *= 2.0;
        hi *= 2.0;
    }
    Ok(bisect(f, lo, hi, 1e-15 * scale, 0.0)?.x)
}

/// One classical fourth-order step for `(phi, phi')`.
fn rk4_step(beta: f64, omega: f64, y: [f64; 2], dt: f64) -> Result<[f64; 2]> {
    let rhs = |s: [f64; 2]| -> Result<[f64; 2]> { Ok([s[1], angular_rhs(beta, omega, s[0], s[1])?]) };
    let add = |s: [f64; 2], k: [f64; 2], c: f64| [s[0] + c * k[0], s[1] + c * k[1]];
    let k1 = rhs(y)?;
    let k2 = rhs(add(y, k1, 0.5 * dt))?;
    let k3 = rhs(add(y, k2, 0.5 * dt))?;
    let k4 = rhs(add(y, k3, dt))?;
    Ok([
        y[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ])
}

fn check_shooting(beta: f64, omega: f64) -> Result<()> {
    if !(beta > 1.0 && beta < 3.0) {
        return crate::error::param(format!("beta must lie in (1, 3), got {beta}"));
    }
    EllipticityPair::unit(omega).map(|_| ())
}

/// Aperture of the sector on which the signed solution started from
/// `(phi, phi') = (0, +-1)` first returns to zero.
pub fn shoot_sector(beta: f64, omega: f64, sign: Sign) -> Result<f64> {
    shoot_sector_with_steps(beta, omega, sign, STEPS_PER_PI)
}

/// [`shoot_sector`] with `steps_per_pi` integration steps per `pi` radians.
pub fn shoot_sector_with_steps(beta: f64, omega: f64, sign: Sign, steps_per_pi: usize) -> Result<f64> {
    check_shooting(beta, omega)?;
    if steps_per_pi < 4 {
        return crate::error::param("need at least 4 steps per pi");
    }
    let dt = PI / steps_per_pi as f64;
    let s = sign.value();
    let mut y = [0.0, s];
    for k in 0..2 * steps_per_pi {
        let next = rk4_step(beta, omega, y, dt)?;
        if next[0] * s <= 0.0 {
            let t0 = k as f64 * dt;
            // Linear interpolation, then one secant step from the
            // interpolated point against the opposite-signed end.
            let frac = y[0] / (y[0] - next[0]);
            let mid = rk4_step(beta, omega, y, frac * dt)?;
            let (a, fa) = (frac * dt, mid[0]);
            let (b, fb) = if fa * s > 0.0 { (dt, next[0]) } else { (0.0, y[0]) };
            let root = if fa == 0.0 || fa == fb { a } else { a - fa * (a - b) / (fa - fb) };
            return Ok(t0 + root);
        }
        y = next;
    }
    Err(Error::NoSectorClosure { beta, omega })
}

/// The solution in one sector on a uniform angular grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularSolution {
    pub beta: f64,
    pub theta_grid: Vec<f64>,
    pub phi: Vec<f64>,
    pub phi_prime: Vec<f64>,
    pub sign: Sign,
}

impl AngularSolution {
    /// Integrates the sector with start angle `start`, scaled to `max |phi| = 1`.
    pub fn shoot(beta: f64, omega: f64, sign: Sign, start: f64) -> Result<Self> {
        let aperture = shoot_sector(beta, omega, sign)?;
        let steps = (aperture / PI * STEPS_PER_PI as f64).ceil() as usize;
        let dt = aperture / steps as f64;
        let mut y = [0.0, sign.value()];
        let mut theta_grid = Vec::with_capacity(steps + 1);
        let mut phi = Vec::with_capacity(steps + 1);
        let mut phi_prime = Vec::with_capacity(steps + 1);
        for k in 0..=steps {
            theta_grid.push(start + k as f64 * dt);
            phi.push(y[0]);
            phi_prime.push(y[1]);
            if k < steps {
                y = rk4_step(beta, omega, y, dt)?;
            }
        }
        phi[0] = 0.0;
        phi[steps] = 0.0;
        let peak = phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (p, q) in phi.iter_mut().zip(phi_prime.iter_mut()) {
            *p /= peak;
            *q /= peak;
        }
        Ok(Self { beta, theta_grid, phi, phi_prime, sign })
    }

    pub fn start(&self) -> f64 {
        self.theta_grid[0]
    }

    pub fn end(&self) -> f64 {
        self.theta_grid[self.theta_grid.len() - 1]
    }

    pub fn aperture(&self) -> f64 {
        self.end() - self.start()
    }

    /// Maps the grid affinely onto `[start, start + aperture]`.
    fn stretch_to(&mut self, start: f64, aperture: f64) {
        let ratio = aperture / self.aperture();
        let old = self.start();
        let last = self.theta_grid.len() - 1;
        for (k, t) in self.theta_grid.iter_mut().enumerate() {
            *t = if k == last { start + aperture } else { start + (*t - old) * ratio };
        }
        for q in &mut self.phi_prime {
            *q /= ratio;
        }
    }

    /// `(phi, phi')` at `theta` by cubic Hermite interpolation; zero outside
    /// the sector.
    pub fn eval(&self, theta: f64) -> (f64, f64) {
        let (a, b) = (self.start(), self.end());
        if theta < a || theta > b {
            return (0.0, 0.0);
        }
        let n = self.theta_grid.len() - 1;
        let dt = (b - a) / n as f64;
        let k = (((theta - a) / dt) as usize).min(n - 1);
        let t = (theta - self.theta_grid[k]) / dt;
        let (p0, p1) = (self.phi[k], self.phi[k + 1]);
        let (m0, m1) = (self.phi_prime[k] * dt, self.phi_prime[k + 1] * dt);
        let t2 = t * t;
        let t3 = t2 * t;
        let value =
            (2.0 * t3 - 3.0 * t2 + 1.0) * p0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * p1 + (t3 - t2) * m1;
        let slope = ((6.0 * t2 - 6.0 * t) * p0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * p1
            + (3.0 * t2 - 2.0 * t) * m1)
            / dt;
        (value, slope)
    }
}

/// The `(1 + alpha_G)`-homogeneous solution vanishing on the slit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupProfile {
    pub omega: f64,
    pub alpha_g: f64,
    pub theta1: f64,
    pub theta2: f64,
    /// Each sector scaled to `max |phi| = 1`.
    pub sectors: [AngularSolution; 3],
    pub c1: f64,
    pub c3: f64,
    /// Final factor making `max |phi| = 1` for the assembled profile.
    pub normalization: f64,
}

impl BlowupProfile {
    pub fn homogeneity(&self) -> f64 {
        1.0 + self.alpha_g
    }

    fn weight(&self, index: usize) -> f64 {
        self.normalization * [self.c1, 1.0, self.c3][index]
    }

    fn sector_index(&self, theta: f64) -> usize {
        if theta < self.theta1 {
            0
        } else if theta < self.theta2 {
            1
        } else {
            2
        }
    }

    /// Assembled `(phi, phi')` at `theta` in `[0, 2 pi]`.
    pub fn angular(&self, theta: f64) -> (f64, f64) {
        let i = self.sector_index(theta);
        let (p, q) = self.sectors[i].eval(theta);
        let w = self.weight(i);
        (w * p, w * q)
    }

    /// One-sided derivatives `(left, right)` at an interface.
    pub fn interface_derivatives(&self, interface: usize) -> (f64, f64) {
        let (l, r) = match interface {
            1 => (0, 1),
            _ => (1, 2),
        };
        let left = &self.sectors[l];
        let right = &self.sectors[r];
        (self.weight(l) * left.phi_prime[left.phi_prime.len() - 1], self.weight(r) * right.phi_prime[0])
    }

    /// Samples `(theta, phi, phi', sector_index)` on every sector grid.
    pub fn angular_table(&self) -> Vec<(f64, f64, f64, usize)> {
        let mut rows = Vec::new();
        for (i, s) in self.sectors.iter().enumerate() {
            let w = self.weight(i);
            for k in 0..s.theta_grid.len() {
                rows.push((s.theta_grid[k], w * s.phi[k], w * s.phi_prime[k], i + 1));
            }
        }
        rows
    }
}

/// Builds the three-sector profile with `C^1` matching at both interfaces.
pub fn build_profile(omega: f64) -> Result<BlowupProfile> {
    let alpha = alpha_pucci(omega)?.alpha;
    let beta = 1.0 + alpha;
    let (half_neg, half_pos) = (g(alpha, omega), h(alpha, omega));
    let theta1 = 2.0 * half_neg;
    let theta2 = theta1 + 2.0 * half_pos;

    let mut s1 = AngularSolution::shoot(beta, omega, Sign::Negative, 0.0)?;
    let mut s2 = AngularSolution::shoot(beta, omega, Sign::Positive, theta1)?;
    let mut s3 = s1.clone();
    s1.stretch_to(0.0, theta1);
    s2.stretch_to(theta1, theta2 - theta1);
    s3.stretch_to(theta2, 2.0 * PI - theta2);

    let d1 = s1.phi_prime[s1.phi_prime.len() - 1];
    let d3 = s3.phi_prime[0];
    for d in [d1, d3] {
        if d.abs() < 1e-10 {
            return Err(Error::DegenerateInterface(d));
        }
    }
    let c1 = s2.phi_prime[0] / d1;
    let c3 = s2.phi_prime[s2.phi_prime.len() - 1] / d3;

    let peak = [c1, 1.0, c3]
        .iter()
        .zip([&s1, &s2, &s3])
        .map(|(c, s)| c * s.phi.iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .fold(0.0f64, f64::max);
    Ok(BlowupProfile {
        omega,
        alpha_g: alpha,
        theta1,
        theta2,
        sectors: [s1, s2, s3],
        c1,
        c3,
        normalization: 1.0 / peak,
    })
}

/// Angle of `(x1, x2)` counterclockwise from the slit, in `[0, 2 pi)`.
pub fn slit_angle(x1: f64, x2: f64) -> f64 {
    let t = x2.atan2(-x1);
    if t < 0.0 {
        t + 2.0 * PI
    } else {
        t
    }
}

/// `r^(1 + alpha_G) phi(theta)`.
pub fn eval_profile(p: &BlowupProfile, x1: f64, x2: f64) -> f64 {
    let r = x1.hypot(x2);
    if r == 0.0 {
        return 0.0;
    }
    r.powf(p.homogeneity()) * p.angular(slit_angle(x1, x2)).0
}

/// Gradient of [`eval_profile`].
pub fn profile_gradient(p: &BlowupProfile, x1: f64, x2: f64) -> [f64; 2] {
    let r = x1.hypot(x2);
    if r == 0.0 {
        return [0.0, 0.0];
    }
    let theta = slit_angle(x1, x2);
    let (phi, dphi) = p.angular(theta);
    let beta = p.homogeneity();
    let (c, s) = (theta.cos(), theta.sin());
    let f = r.powf(beta - 1.0);
    [f * (-beta * phi * c + dphi * s), f * (beta * phi * s + dphi * c)]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub step: f64,
    pub samples: usize,
    /// `max |P+(D^2 u)| / |D^2 u|` over the samples.
    pub max_relative_residual: f64,
    pub max_abs_residual: f64,
    /// Smallest value on the thin line (zero on the slit, positive beyond).
    pub thin_min: f64,
    /// Smallest sampled `d u / d x1`.
    pub min_dx1: f64,
    /// `d u / d x2` jump across the slit at unit distance, `phi'(0) - phi'(2 pi)`.
    pub slit_jump: f64,
    pub passed: bool,
}

/// Checks the profile against the equation and its sign conditions using
/// central differences with step `step`.
pub fn verify_profile(p: &BlowupProfile, tolerance: f64, step: f64) -> ProfileReport {
    let ell = EllipticityPair { lambda: 1.0, big_lambda: p.omega };
    let u = |x1: f64, x2: f64| eval_profile(p, x1, x2);
    let (nr, nt) = (16, 256);
    let points: Vec<(f64, f64)> = (0..nr)
        .flat_map(|i| {
            let r = 0.25 + 0.75 * i as f64 / (nr - 1) as f64;
            (0..nt).map(move |j| {
                let t = 2.0 * PI * (j as f64 + 0.5) / nt as f64;
                (-r * t.cos(), r * t.sin())
            })
        })
        .filter(|&(x1, x2)| !(x1 < step && x2.abs() < 2.0 * step))
        .collect();
    let (rel, abs) = points
        .par_iter()
        .map(|&(x1, x2)| {
            let c = u(x1, x2);
            let m11 = (u(x1 + step, x2) - 2.0 * c + u(x1 - step, x2)) / (step * step);
            let m22 = (u(x1, x2 + step) - 2.0 * c + u(x1, x2 - step)) / (step * step);
            let m12 = (u(x1 + step, x2 + step) - u(x1 + step, x2 - step) - u(x1 - step, x2 + step)
                + u(x1 - step, x2 - step))
                / (4.0 * step * step);
            let hess = SymMat2::new(m11, m12, m22);
            let res = pucci_plus(&hess, ell).abs();
            (res / hess.spectral_norm().max(1e-300), res)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));

    let thin_min = (0..=64).map(|k| u(-1.0 + 2.0 * k as f64 / 64.0, 0.0)).fold(f64::INFINITY, f64::min);
    let mut min_dx1 = f64::INFINITY;
    for i in 0..64 {
        for j in 0..64 {
            let x1 = -1.0 + (2.0 * i as f64 + 1.0) / 64.0;
            let x2 = -1.0 + (2.0 * j as f64 + 1.0) / 64.0;
            if x1.hypot(x2) <= 1.0 {
                min_dx1 = min_dx1.min(profile_gradient(p, x1, x2)[0]);
            }
        }
    }
    let slit_jump = p.angular(0.0).1 - p.angular(2.0 * PI).1;
    let passed = rel <= tolerance && thin_min >= 0.0 && min_dx1 >= -1e-8;
    ProfileReport {
        step,
        samples: points.len(),
        max_relative_residual: rel,
        max_abs_residual: abs,
        thin_min,
        min_dx1,
        slit_jump,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polar_hessian_examples() {
        let m = hessian_of_homogeneous(2.0, 1.0, 0.0, -2.0);
        assert_eq!(m, SymMat2::new(2.0, 0.0, 0.0));
        for t in [0.0f64, 0.4, 2.0] {
            let m = hessian_of_homogeneous(1.0, t.sin(), t.cos(), -t.sin());
            assert!(m.m11.abs() < 1e-15 && m.m12.abs() < 1e-15 && m.m22.abs() < 1e-15);
        }
        let ell = EllipticityPair::unit(1.0).unwrap();
        for k in 0..50 {
            let t = k as f64 * 0.1;
            let b = 1.5;
            let m = hessian_of_homogeneous(b, (b * t).cos(), -b * (b * t).sin(), -b * b * (b * t).cos());
            assert!(pucci_plus(&m, ell).abs() < 1e-13);
        }
    }

    #[test]
    fn polar_hessian_matches_cartesian_differences() {
        // u = r^2 cos(2 theta) written through the polar frame at r = 1.
        let beta = 2.0;
        for t in [0.3f64, 1.1, 2.5] {
            let m = hessian_of_homogeneous(beta, (2.0 * t).cos(), -2.0 * (2.0 * t).sin(), -4.0 * (2.0 * t).cos());
            let u = |x: f64, y: f64| {
                let r2 = x * x + y * y;
                let th = y.atan2(x);
                r2 * (2.0 * th).cos()
            };
            let (x, y, e) = (t.cos(), t.sin(), 1e-4);
            let uxx = (u(x + e, y) - 2.0 * u(x, y) + u(x - e, y)) / (e * e);
            let uyy = (u(x, y + e) - 2.0 * u(x, y) + u(x, y - e)) / (e * e);
            let uxy = (u(x + e, y + e) - u(x + e, y - e) - u(x - e, y + e) + u(x - e, y - e)) / (4.0 * e * e);
            let cart = SymMat2::new(uxx, uxy, uyy).rotated(t);
            assert!((cart.m11 - m.m11).abs() < 1e-5);
            assert!((cart.m12 - m.m12).abs() < 1e-5);
            assert!((cart.m22 - m.m22).abs() < 1e-5);
        }
    }

    #[test]
    fn angular_rhs_cases() {
        for b in [1.2, 1.5, 1.9] {
            for (p, q) in [(0.3, -0.7), (-1.0, 0.2), (0.5, 0.0)] {
                let x = angular_rhs(b, 1.0, p, q).unwrap();
                assert!((x + b * b * p).abs() < 1e-12, "{x} vs {}", -b * b * p);
            }
        }
        assert_eq!(angular_rhs(1.5, 2.0, 0.0, 0.0).unwrap(), 0.0);
        let base = angular_rhs(1.6, 3.0, 0.4, -0.9).unwrap();
        for t in [0.5, 2.0, 10.0] {
            let scaled = angular_rhs(1.6, 3.0, 0.4 * t, -0.9 * t).unwrap();
            assert!((scaled - t * base).abs() <= 1e-12 * (t * base).abs());
        }
    }

    #[test]
    fn laplacian_sector_is_two_thirds_pi() {
        for sign in [Sign::Positive, Sign::Negative] {
            let a = shoot_sector(1.5, 1.0, sign).unwrap();
            assert!((a - 2.0 * PI / 3.0).abs() < 1e-6, "{a}");
        }
    }

    #[test]
    fn shooting_order_of_accuracy() {
        let exact = 2.0 * PI / 3.0;
        let errs: Vec<f64> = [8, 16, 32]
            .iter()
            .map(|&n| (shoot_sector_with_steps(1.5, 1.0, Sign::Positive, n).unwrap() - exact).abs())
            .collect();
        let order = (errs[1] / errs[2]).log2();
        assert!(order > 3.5, "observed order {order}, errors {errs:?}");
    }

    #[test]
    fn no_closure_is_reported() {
        assert!(shoot_sector(1.5, 1.0, Sign::Positive).is_ok());
        assert!(matches!(shoot_sector(0.9, 1.0, Sign::Positive), Err(Error::Parameter(_))));
    }

    #[test]
    fn harmonic_profile() {
        let p = build_profile(1.0).unwrap();
        assert!((p.theta1 - 2.0 * PI / 3.0).abs() < 1e-14);
        assert!((p.theta2 - 4.0 * PI / 3.0).abs() < 1e-14);
        let mut worst = 0.0f64;
        for k in 0..=4096 {
            let t = 2.0 * PI * k as f64 / 4096.0;
            let exact = (1.5 * (t - PI)).cos();
            worst = worst.max((p.angular(t).0 - exact).abs());
        }
        assert!(worst < 1e-4, "{worst}");
    }

    #[test]
    fn profile_is_homogeneous_and_vanishes_on_slit() {
        let p = build_profile(2.0).unwrap();
        assert_eq!(eval_profile(&p, 0.0, 0.0), 0.0);
        for x1 in [-1.0, -0.5, -0.01] {
            assert!(eval_profile(&p, x1, 0.0).abs() < 1e-8);
        }
        let b = p.homogeneity();
        for (x1, x2) in [(0.3, 0.2), (-0.4, 0.7), (0.1, -0.6)] {
            let ratio = eval_profile(&p, 2.0 * x1, 2.0 * x2) / eval_profile(&p, x1, x2);
            assert!((ratio - 2f64.powf(b)).abs() < 1e-12);
        }
    }
}
