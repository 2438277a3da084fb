//! Convex, uniformly elliptic operators on symmetric 2x2 matrices.
//!
//! An operator is a finite maximum of affine pieces. A piece is either linear,
//! `tr(L M) + c`, or a Pucci maximal operator shifted by a constant,
//! `P+(M) + c`. Offsets are normalized at construction so that the largest
//! one is zero, which makes `F(0) = 0`.

mod config;
mod matrix;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::roots::bisect;

pub use config::{parse_operator, OperatorSpec};
pub use matrix::SymMat2;

/// Ellipticity constants `0 < lambda <= big_lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticityPair {
    pub lambda: f64,
    pub big_lambda: f64,
}

impl EllipticityPair {
    pub fn new(lambda: f64, big_lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite() && big_lambda.is_finite() && big_lambda >= lambda) {
            return param(format!(
                "ellipticity constants must satisfy 0 < lambda <= Lambda < inf, got ({lambda}, {big_lambda})"
            ));
        }
        Ok(Self { lambda, big_lambda })
    }

    /// `(1, omega)`, the normalization used for the regular-point exponents.
    pub fn unit(omega: f64) -> Result<Self> {
        Self::new(1.0, omega)
    }

    pub fn omega(&self) -> f64 {
        self.big_lambda / self.lambda
    }

    /// Weight applied to one eigenvalue by the maximal operator.
    #[inline]
    pub fn weigh_plus(&self, mu: f64) -> f64 {
        if mu > 0.0 {
            self.big_lambda * mu
        } else {
            self.lambda * mu
        }
    }

    #[inline]
    pub fn weigh_minus(&self, mu: f64) -> f64 {
        if mu > 0.0 {
            self.lambda * mu
        } else {
            self.big_lambda * mu
        }
    }
}

/// Maximal Pucci operator: `Lambda * (positive eigenvalues) + lambda * (negative eigenvalues)`.
pub fn pucci_plus(m: &SymMat2, ell: EllipticityPair) -> f64 {
    let (a, b) = m.eigenvalues();
    ell.weigh_plus(a) + ell.weigh_plus(b)
}

/// Minimal Pucci operator: `lambda * (positive eigenvalues) + Lambda * (negative eigenvalues)`.
pub fn pucci_minus(m: &SymMat2, ell: EllipticityPair) -> f64 {
    let (a, b) = m.eigenvalues();
    ell.weigh_minus(a) + ell.weigh_minus(b)
}

/// One affine piece `tr(L M) + c` of a sup-form operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearTerm {
    pub coeff: SymMat2,
    pub offset: f64,
}

impl LinearTerm {
    pub fn new(coeff: SymMat2, offset: f64) -> Self {
        Self { coeff, offset }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Term {
    Linear(LinearTerm),
    Pucci { ell: EllipticityPair, offset: f64 },
}

impl Term {
    pub fn offset(&self) -> f64 {
        match *self {
            Term::Linear(t) => t.offset,
            Term::Pucci { offset, .. } => offset,
        }
    }

    fn with_offset(self, offset: f64) -> Term {
        match self {
            Term::Linear(t) => Term::Linear(LinearTerm { offset, ..t }),
            Term::Pucci { ell, .. } => Term::Pucci { ell, offset },
        }
    }

    #[inline]
    pub fn eval(&self, m: &SymMat2) -> f64 {
        match self {
            Term::Linear(t) => t.coeff.frobenius_dot(m) + t.offset,
            Term::Pucci { ell, offset } => pucci_plus(m, *ell) + offset,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OperatorKind {
    /// Finite maximum of linear pieces.
    SupForm,
    /// A single unshifted maximal Pucci operator.
    PucciPlus(EllipticityPair),
    /// Maximum of shifted Pucci operators (and possibly linear pieces).
    PucciMax,
}

/// Convex uniformly elliptic operator `F(M) = max_k (piece_k(M))` with
/// `max_k offset_k = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexOperator {
    terms: Vec<Term>,
    ell: EllipticityPair,
    kind: OperatorKind,
}

impl ConvexOperator {
    /// Sup-form operator from linear pieces. Every coefficient matrix must lie
    /// between `lambda Id` and `Lambda Id`.
    pub fn sup_form(terms: Vec<LinearTerm>, ell: EllipticityPair) -> Result<Self> {
        for (k, t) in terms.iter().enumerate() {
            let (a, b) = t.coeff.eigenvalues();
            let slack = 1e-12 * ell.big_lambda;
            if a < ell.lambda - slack || b > ell.big_lambda + slack {
                return param(format!(
                    "term {k}: eigenvalues ({a}, {b}) of L outside [{}, {}]",
                    ell.lambda, ell.big_lambda
                ));
            }
        }
        Self::from_terms(terms.into_iter().map(Term::Linear).collect(), ell, OperatorKind::SupForm)
    }

    pub fn pucci_plus(ell: EllipticityPair) -> Self {
        Self { terms: vec![Term::Pucci { ell, offset: 0.0 }], ell, kind: OperatorKind::PucciPlus(ell) }
    }

    pub fn laplacian() -> Self {
        let ell = EllipticityPair { lambda: 1.0, big_lambda: 1.0 };
        Self { terms: vec![Term::Linear(LinearTerm::new(SymMat2::identity(), 0.0))], ell, kind: OperatorKind::SupForm }
    }

    /// `max_j (P+_{1, Lambda_j}(M) - offsets[j])` with nonnegative `offsets`.
    ///
    /// A piece with `Lambda_j = 1` is the trace and is stored as a linear
    /// piece.
    pub fn pucci_family(big_lambdas: &[f64], offsets: &[f64]) -> Result<Self> {
        if big_lambdas.is_empty() || big_lambdas.len() != offsets.len() {
            return param("pucci family needs matching, non-empty Lambda and offset lists");
        }
        let mut terms = Vec::with_capacity(big_lambdas.len());
        let mut top = 1.0f64;
        for (&lam, &c) in big_lambdas.iter().zip(offsets) {
            if !(c >= 0.0 && c.is_finite()) {
                return param(format!("pucci family offsets must be finite and >= 0, got {c}"));
            }
            let ell = EllipticityPair::new(1.0, lam)?;
            top = top.max(lam);
            terms.push(if lam == 1.0 {
                Term::Linear(LinearTerm::new(SymMat2::identity(), -c))
            } else {
                Term::Pucci { ell, offset: -c }
            });
        }
        Self::from_terms(terms, EllipticityPair::new(1.0, top)?, OperatorKind::PucciMax)
    }

    /// The operator of the non-homogeneous counterexample family:
    /// `Lambda_j = 2 - 1/(j+1)` for `j = 0..=i`.
    pub fn counterexample_family(i: usize, offsets: &[f64]) -> Result<Self> {
        if offsets.len() != i + 1 {
            return param(format!("need {} offsets for i = {i}, got {}", i + 1, offsets.len()));
        }
        let lambdas: Vec<f64> = (0..=i).map(|j| 2.0 - 1.0 / (j as f64 + 1.0)).collect();
        Self::pucci_family(&lambdas, offsets)
    }

    fn from_terms(terms: Vec<Term>, ell: EllipticityPair, kind: OperatorKind) -> Result<Self> {
        if terms.is_empty() {
            return param("operator needs at least one term");
        }
        let top = terms.iter().map(Term::offset).fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return param("operator offsets must be finite");
        }
        let terms = terms.into_iter().map(|t| t.with_offset(t.offset() - top)).collect();
        Ok(Self { terms, ell, kind })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn ellipticity(&self) -> EllipticityPair {
        self.ell
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn is_homogeneous(&self) -> bool {
        self.terms.iter().all(|t| t.offset() == 0.0)
    }

    pub fn eval(&self, m: &SymMat2) -> f64 {
        if let OperatorKind::PucciPlus(ell) = self.kind {
            return pucci_plus(m, ell);
        }
        self.terms.iter().map(|t| t.eval(m)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Recession function `F*(M) = lim_{t -> inf} F(t M) / t`: every offset
    /// dropped to zero.
    pub fn recession(&self) -> ConvexOperator {
        if self.is_homogeneous() {
            return self.clone();
        }
        Self { terms: self.terms.iter().map(|t| t.with_offset(0.0)).collect(), ell: self.ell, kind: self.kind }
    }
}

/// Grid estimate of
/// `omega_F(tau) = sup_{0 < xi <= tau} sup_{|A| <= 1} |xi F(A / xi) - F*(A)|`.
///
/// `samples` is the resolution per axis of the deterministic grid: `samples`
/// values of `xi` in `(0, tau]`, a `samples x samples` grid of eigenvalue pairs
/// in `[-1, 1]^2` and `samples` frame angles in `[0, pi)`. For convex `F` with
/// `F(0) = 0` the inner quantity is nondecreasing in `xi`, so the estimate is
/// monotone in `tau` for a fixed `samples`.
pub fn modulus_omega(op: &ConvexOperator, tau: f64, samples: usize) -> Result<f64> {
    if samples == 0 {
        return param("modulus_omega needs samples >= 1");
    }
    if !(tau > 0.0 && tau <= 1.0) {
        return param(format!("tau must lie in (0, 1], got {tau}"));
    }
    if op.is_homogeneous() {
        return Ok(0.0);
    }
    let star = op.recession();
    let axis: Vec<f64> = if samples == 1 {
        vec![1.0]
    } else {
        (0..samples).map(|k| -1.0 + 2.0 * k as f64 / (samples - 1) as f64).collect()
    };
    let angles: Vec<f64> = (0..samples).map(|k| std::f64::consts::PI * k as f64 / samples as f64).collect();
    let xis: Vec<f64> = (1..=samples).map(|k| tau * k as f64 / samples as f64).collect();
    let worst = angles
        .par_iter()
        .map(|&angle| {
            let mut worst = 0.0f64;
            for (i, &mu1) in axis.iter().enumerate() {
                for &mu2 in &axis[i..] {
                    let a = SymMat2::from_eigen(mu1, mu2, angle);
                    let f_star = star.eval(&a);
                    for &xi in &xis {
                        let scaled = xi * op.eval(&a.scale(1.0 / xi));
                        worst = worst.max((scaled - f_star).abs());
                    }
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

/// Power-law fit `omega_F(tau) ~ C tau^kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaFit {
    /// `f64::INFINITY` when the operator is 1-homogeneous (`omega_F = 0`).
    pub kappa: f64,
    pub c_kappa: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
}

/// Least-squares slope of `log omega_F` against `log tau`.
pub fn estimate_kappa(op: &ConvexOperator, tau_grid: &[f64], samples: usize) -> Result<KappaFit> {
    if tau_grid.len() < 3 {
        return param("estimate_kappa needs at least 3 tau values");
    }
    let mut pts = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        let w = modulus_omega(op, tau, samples)?;
        if w > 0.0 {
            pts.push((tau.ln(), w.ln()));
        }
    }
    if pts.is_empty() {
        return Ok(KappaFit { kappa: f64::INFINITY, c_kappa: 0.0, residual: 0.0 });
    }
    if pts.len() < 3 {
        return Err(Error::Numerical(format!(
            "omega_F vanishes at {} of {} tau values; cannot fit a power law",
            tau_grid.len() - pts.len(),
            tau_grid.len()
        )));
    }
    let fit = crate::analysis::least_squares(&pts);
    Ok(KappaFit { kappa: fit.slope, c_kappa: fit.intercept.exp(), residual: fit.rms })
}

/// For a rotationally invariant, 1-homogeneous elliptic `f(l1, l2)` of the
/// ordered eigenvalues `l1 >= l2`, find `w` in `[1, Lambda/lambda]` with
/// `f(1, -w) = 0`, so that `{f <= 0}` coincides with `{P+_{1,w} <= 0}`.
pub fn equivalent_pucci_2d<F>(f: F, ell: EllipticityPair) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    // Spot checks of homogeneity and strict monotonicity.
    for &(l1, l2) in &[(1.0, -0.5), (2.0, -3.0), (0.5, -0.1), (3.0, 1.0)] {
        let base = f(l1, l2);
        for t in [0.5, 3.0] {
            let scaled = f(t * l1, t * l2);
            if (scaled - t * base).abs() > 1e-9 * (1.0 + (t * base).abs()) {
                return param(format!("eigenvalue map is not 1-homogeneous at ({l1}, {l2})"));
            }
        }
        if !(f(l1 + 0.1, l2) > base && f(l1, l2 + 0.1) > base) {
            return param(format!("eigenvalue map is not increasing at ({l1}, {l2})"));
        }
    }
    let omega_max = ell.omega();
    let g = |w: f64| f(1.0, -w);
    let (lo, hi) = (g(1.0), g(omega_max));
    if lo == 0.0 {
        return Ok(1.0);
    }
    if hi == 0.0 {
        return Ok(omega_max);
    }
    if lo.signum() == hi.signum() {
        return Err(Error::NotEquivalentToPucci { omega_max });
    }
    Ok(bisect(g, 1.0, omega_max, 1e-12, 0.0)?.x)
}

/// `Lambda_F = 1 + (1/n) (sqrt(L_n / L_1) - 1)` for an ordered subgradient
/// `L_1 <= ... <= L_n` of the recession function.
pub fn lambda_f_bound(subgradient: &[f64]) -> Result<f64> {
    let n = subgradient.len();
    if n == 0 {
        return param("subgradient must be non-empty");
    }
    if subgradient.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return param("subgradient entries must be positive");
    }
    if subgradient.windows(2).any(|w| w[1] < w[0]) {
        return param("subgradient entries must be nondecreasing");
    }
    let ratio = subgradient[n - 1] / subgradient[0];
    Ok(1.0 + (ratio.sqrt() - 1.0) / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn ell(a: f64, b: f64) -> EllipticityPair {
        EllipticityPair::new(a, b).unwrap()
    }

    fn random_mat(rng: &mut ChaCha8Rng, scale: f64) -> SymMat2 {
        SymMat2::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
    }

    /// Unit-spectral-norm matrix from random eigenvalues and frame.
    fn random_unit_mat(rng: &mut ChaCha8Rng) -> SymMat2 {
        let mut a: f64 = rng.gen_range(-1.0..1.0);
        let mut b: f64 = rng.gen_range(-1.0..1.0);
        let s = a.abs().max(b.abs());
        a /= s;
        b /= s;
        SymMat2::from_eigen(a, b, rng.gen_range(0.0..PI))
    }

    fn family_1() -> ConvexOperator {
        ConvexOperator::pucci_family(&[1.0, 1.5], &[0.0, 5.0]).unwrap()
    }

    #[test]
    fn ellipticity_pair_validation() {
        assert!(EllipticityPair::new(0.0, 1.0).is_err());
        assert!(EllipticityPair::new(2.0, 1.0).is_err());
        assert_eq!(ell(1.0, 3.0).omega(), 3.0);
    }

    #[test]
    fn pucci_examples() {
        let e = ell(1.0, 2.0);
        assert_eq!(pucci_plus(&SymMat2::identity(), e), 4.0);
        assert_eq!(pucci_plus(&SymMat2::diag(1.0, -1.0), e), 1.0);
        assert_eq!(pucci_minus(&SymMat2::identity(), e), 2.0);
        assert_eq!(pucci_minus(&SymMat2::diag(1.0, -1.0), e), -1.0);
    }

    #[test]
    fn pucci_rotation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let e = ell(0.7, 2.3);
        for _ in 0..100 {
            let m = random_mat(&mut rng, 5.0);
            let t = rng.gen_range(0.0..2.0 * PI);
            let (p, q) = (pucci_plus(&m, e), pucci_plus(&m.rotated(t), e));
            assert!((p - q).abs() <= 1e-12 * (1.0 + p.abs()), "{p} vs {q}");
            assert!(pucci_minus(&m, e) <= p);
        }
    }

    #[test]
    fn eval_examples() {
        let lap = ConvexOperator::laplacian();
        let m = SymMat2::new(0.3, -1.0, 2.0);
        assert_eq!(lap.eval(&m), m.trace());
        assert_eq!(family_1().eval(&SymMat2::identity()), 2.0);
    }

    #[test]
    fn offsets_are_normalized() {
        let e = ell(1.0, 2.0);
        let f = ConvexOperator::sup_form(
            vec![LinearTerm::new(SymMat2::identity(), -3.0), LinearTerm::new(SymMat2::diag(1.0, 2.0), -1.0)],
            e,
        )
        .unwrap();
        let offsets: Vec<f64> = f.terms().iter().map(Term::offset).collect();
        assert_eq!(offsets, vec![-2.0, 0.0]);
        assert_eq!(f.eval(&SymMat2::default()), 0.0);
    }

    #[test]
    fn sup_form_rejects_non_elliptic_terms() {
        let r = ConvexOperator::sup_form(vec![LinearTerm::new(SymMat2::diag(0.5, 1.0), 0.0)], ell(1.0, 2.0));
        assert!(matches!(r, Err(Error::Parameter(_))));
    }

    #[test]
    fn sandwich_between_pucci_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let e = ell(1.0, 2.0);
        let ops = [
            ConvexOperator::laplacian(),
            ConvexOperator::pucci_plus(e),
            family_1(),
            ConvexOperator::counterexample_family(3, &[0.0, 1.0, 4.0, 9.0]).unwrap(),
            ConvexOperator::sup_form(
                (0..7).map(|k| LinearTerm::new(SymMat2::from_eigen(1.0, 2.0, k as f64 * 0.4), -(k as f64))).collect(),
                e,
            )
            .unwrap(),
        ];
        for op in &ops {
            let oe = op.ellipticity();
            for _ in 0..100 {
                let m = random_mat(&mut rng, 4.0);
                let v = op.eval(&m);
                assert!(pucci_minus(&m, oe) <= v + 1e-12);
                assert!(v <= pucci_plus(&m, oe) + 1e-12);
            }
        }
    }

    #[test]
    fn uniform_ellipticity_increment() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ops = [ConvexOperator::pucci_plus(ell(1.0, 3.0)), family_1(), ConvexOperator::laplacian()];
        for op in &ops {
            let e = op.ellipticity();
            for _ in 0..100 {
                let m = random_mat(&mut rng, 3.0);
                let a: f64 = rng.gen_range(0.0..1.0);
                let n = SymMat2::from_eigen(a, 1.0, rng.gen_range(0.0..PI));
                let inc = op.eval(&m.add(&n)) - op.eval(&m);
                assert!(inc > 0.0);
                assert!(inc >= e.lambda * n.spectral_norm() - 1e-12);
                assert!(inc <= 2.0 * e.big_lambda * n.spectral_norm() + 1e-12);
            }
        }
    }

    #[test]
    fn recession_is_homogeneous_and_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = family_1();
        let star = f.recession();
        assert!(star.is_homogeneous());
        assert_eq!(star.recession(), star);
        let lap = ConvexOperator::laplacian();
        assert_eq!(lap.recession(), lap);
        for _ in 0..50 {
            let m = random_mat(&mut rng, 2.0);
            let v = star.eval(&m);
            for t in [0.5, 2.0, 10.0] {
                let w = star.eval(&m.scale(t));
                assert!((w - t * v).abs() <= 1e-12 * (1.0 + (t * v).abs()));
            }
        }
    }

    #[test]
    fn recession_of_family_is_largest_pucci() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = ConvexOperator::counterexample_family(2, &[0.0, 3.0, 40.0]).unwrap();
        let top = ell(1.0, 2.0 - 1.0 / 3.0);
        let mu = 1e9;
        for _ in 0..100 {
            let m = random_unit_mat(&mut rng);
            let limit = f.eval(&m.scale(mu)) / mu;
            assert!((limit - pucci_plus(&m, top)).abs() < 1e-6);
        }
    }

    #[test]
    fn rotated_sup_form_approximates_pucci() {
        // tr(L M) over rotated copies of diag(Lambda, lambda) and diag(lambda, lambda),
        // diag(Lambda, Lambda) approaches P+ as the angular grid is refined.
        let e = ell(1.0, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mats: Vec<SymMat2> = (0..50).map(|_| random_unit_mat(&mut rng)).collect();
        let mut prev = f64::INFINITY;
        for k in [4usize, 16, 64] {
            let mut terms =
                vec![LinearTerm::new(SymMat2::diag(1.0, 1.0), 0.0), LinearTerm::new(SymMat2::diag(2.0, 2.0), 0.0)];
            for j in 0..k {
                terms.push(LinearTerm::new(SymMat2::from_eigen(2.0, 1.0, PI * j as f64 / k as f64), 0.0));
            }
            let op = ConvexOperator::sup_form(terms, e).unwrap();
            let err = mats.iter().map(|m| pucci_plus(m, e) - op.eval(m)).fold(0.0f64, f64::max);
            let dtheta = PI / k as f64;
            assert!(err >= -1e-12);
            assert!(err <= (e.big_lambda - e.lambda) * 2.0 * (dtheta / 2.0).sin().powi(2) + 1e-12);
            assert!(err < prev);
            prev = err;
        }
    }

    #[test]
    fn modulus_of_homogeneous_operator_vanishes() {
        let op = ConvexOperator::pucci_plus(ell(1.0, 2.0));
        assert_eq!(modulus_omega(&op, 0.5, 8).unwrap(), 0.0);
        assert!(matches!(modulus_omega(&op, 0.5, 0), Err(Error::Parameter(_))));
        assert!(modulus_omega(&op, 1.5, 4).is_err());
        let fit = estimate_kappa(&op, &[0.01, 0.1, 1.0], 4).unwrap();
        assert_eq!(fit.kappa, f64::INFINITY);
    }

    /// max(tr A, 2 tr A - 1): for |A| <= 1 the gap F* - xi F(A / xi) equals
    /// min(tr A, xi) when tr A > 0, so omega_F(tau) = tau on (0, 1].
    fn linear_modulus_operator() -> ConvexOperator {
        ConvexOperator::sup_form(
            vec![LinearTerm::new(SymMat2::identity(), 0.0), LinearTerm::new(SymMat2::diag(2.0, 2.0), -1.0)],
            ell(1.0, 2.0),
        )
        .unwrap()
    }

    /// Brute-force oracle: dense sampling of the defining double supremum.
    fn dense_modulus(op: &ConvexOperator, tau: f64) -> f64 {
        let star = op.recession();
        let mut worst = 0.0f64;
        for i in 0..=40 {
            for j in 0..=40 {
                for k in 0..12 {
                    let a = SymMat2::from_eigen(-1.0 + i as f64 / 20.0, -1.0 + j as f64 / 20.0, PI * k as f64 / 12.0);
                    for s in 1..=50 {
                        let xi = tau * s as f64 / 50.0;
                        worst = worst.max((xi * op.eval(&a.scale(1.0 / xi)) - star.eval(&a)).abs());
                    }
                }
            }
        }
        worst
    }

    #[test]
    fn linear_modulus_matches_oracle() {
        let op = linear_modulus_operator();
        for tau in [0.05, 0.2, 0.7, 1.0] {
            let oracle = dense_modulus(&op, tau);
            assert!((oracle - tau).abs() < 1e-12, "oracle {oracle} at {tau}");
            let est = modulus_omega(&op, tau, 9).unwrap();
            assert!((est - tau).abs() < 1e-12, "estimate {est} at {tau}");
        }
        let fit = estimate_kappa(&op, &[1e-3, 1e-2, 0.1, 0.5], 9).unwrap();
        assert!((fit.kappa - 1.0).abs() < 0.05, "kappa {}", fit.kappa);
        assert!((fit.c_kappa - 1.0).abs() < 0.05);
    }

    /// Multi-term family max_k ((1 + S - u_k) tr A - c_k) with c_k ~ 1/u_k:
    /// the gap at A = Id is min_k (2 u_k + c_k xi) ~ 2 sqrt(2 xi).
    fn sqrt_modulus_operator() -> ConvexOperator {
        let mut terms = vec![LinearTerm::new(SymMat2::diag(2.0, 2.0), -1e4)];
        let mut u = 1e-3;
        while u <= 1.0 {
            terms.push(LinearTerm::new(SymMat2::identity().scale(2.0 - u), -1.0 / u));
            u *= 1.1;
        }
        ConvexOperator::sup_form(terms, ell(1.0, 2.0)).unwrap()
    }

    #[test]
    fn sqrt_modulus_family() {
        let op = sqrt_modulus_operator();
        let taus = [1e-5, 1e-4, 1e-3, 1e-2];
        for &tau in &taus[1..3] {
            let est = modulus_omega(&op, tau, 9).unwrap();
            let oracle = dense_modulus(&op, tau);
            assert!((est - oracle).abs() <= 1e-9 * oracle.max(1.0), "{est} vs {oracle}");
        }
        let fit = estimate_kappa(&op, &taus, 9).unwrap();
        assert!((fit.kappa - 0.5).abs() < 0.05, "kappa {}", fit.kappa);
    }

    #[test]
    fn modulus_is_monotone_in_tau() {
        let op = ConvexOperator::counterexample_family(2, &[0.0, 2.0, 7.0]).unwrap();
        let mut prev = 0.0;
        for k in 1..=10 {
            let w = modulus_omega(&op, k as f64 / 10.0, 7).unwrap();
            assert!(w + 1e-9 >= prev, "omega dropped from {prev} to {w}");
            prev = w;
        }
    }

    #[test]
    fn equivalent_pucci_examples() {
        let e = ell(1.0, 3.0);
        assert_eq!(equivalent_pucci_2d(|a, b| a + b, e).unwrap(), 1.0);
        let w = equivalent_pucci_2d(|a, b| e.weigh_plus(a) + e.weigh_plus(b), e).unwrap();
        assert!((w - 3.0).abs() < 1e-12);
        let e2 = ell(1.0, 2.0);
        let avg = |a: f64, b: f64| 0.5 * (a + b) + 0.5 * (e2.weigh_plus(a) + e2.weigh_plus(b));
        let w = equivalent_pucci_2d(avg, e2).unwrap();
        assert!((w - 1.5).abs() < 1e-12);
    }

    #[test]
    fn equivalent_pucci_degenerate_direction() {
        // Strictly positive on the whole ray (1, -w), w <= Lambda/lambda.
        let f = |a: f64, b: f64| 3.0 * a + b;
        assert!(matches!(equivalent_pucci_2d(f, ell(1.0, 2.0)), Err(Error::NotEquivalentToPucci { .. })));
        assert!(matches!(equivalent_pucci_2d(|a: f64, b: f64| a * a + b, ell(1.0, 2.0)), Err(Error::Parameter(_))));
    }

    #[test]
    fn lambda_f_examples() {
        assert_eq!(lambda_f_bound(&[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(lambda_f_bound(&[1.0, 4.0]).unwrap(), 1.5);
        assert!((lambda_f_bound(&[1.0, 2.0, 9.0]).unwrap() - 5.0 / 3.0).abs() < 1e-15);
        assert!(lambda_f_bound(&[0.0, 1.0]).is_err());
        assert!(lambda_f_bound(&[2.0, 1.0]).is_err());
    }
}
