//! Invariant suites printed as one `PASS`/`FAIL` line per check.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thinfree::analysis::{comparability_check, estimate_exponent_field, find_free_boundary, ExponentOptions};
use thinfree::exponents::{alpha_infinity, alpha_pucci, alpha_table, g, h, master_g, Sign};
use thinfree::fdsolver::{residual_report, solve_thin_obstacle, BoundaryData, Discretization, Grid2D};
use thinfree::fdsolver::{ObstacleProblemSpec, SolverConfig};
use thinfree::operators::{pucci_plus, ConvexOperator, EllipticityPair, SymMat2};
use thinfree::profiles::{build_profile, shoot_sector, verify_profile};
use thinfree::roots::bisect;

use crate::{CliError, Suite};

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Outcome = thinfree::Result<(bool, String)>;

fn alpha_at_one() -> Outcome {
    let r = alpha_pucci(1.0)?;
    Ok(((r.alpha - 0.5).abs() <= 1e-12 && r.residual.abs() <= 1e-12, format!("alpha = {}", r.alpha)))
}

fn alpha_limit() -> Outcome {
    let a = alpha_infinity().alpha;
    let root = bisect(|x| master_g(0.0, x).unwrap_or(f64::NAN), 0.5, 0.7, 1e-15, 0.0)?.x;
    let ok = (a - 0.643_069_95).abs() < 5e-9 && (a - root).abs() <= 1e-10;
    Ok((ok, format!("alpha_inf = {a}, root of G(0, .) = {root}")))
}

fn alpha_monotone() -> Outcome {
    let rows = alpha_table(&[1.0, 1.5, 2.0, 4.0, 10.0, 100.0])?;
    let top = alpha_infinity().alpha;
    let increasing = rows.windows(2).all(|w| w[1].alpha > w[0].alpha);
    let bounded = rows.iter().all(|r| r.alpha >= 0.5 && r.alpha < top);
    let worst = rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max);
    Ok((increasing && bounded && worst <= 1e-12, format!("max residual {worst:e}")))
}

fn apertures(omega: f64) -> Outcome {
    let a = alpha_pucci(omega)?.alpha;
    let neg = shoot_sector(1.0 + a, omega, Sign::Negative)?;
    let pos = shoot_sector(1.0 + a, omega, Sign::Positive)?;
    let e1 = (neg - 2.0 * g(a, omega)).abs();
    let e2 = (pos - 2.0 * h(a, omega)).abs();
    let sum = (2.0 * neg + pos - 2.0 * PI).abs();
    Ok((e1 <= 1e-4 && e2 <= 1e-4 && sum <= 2e-4, format!("omega = {omega}: errors {e1:.2e}, {e2:.2e}, sum {sum:.2e}")))
}

fn profile_residual(omega: f64) -> Outcome {
    let p = build_profile(omega)?;
    let r = verify_profile(&p, 1e-3, 1e-3);
    Ok((r.passed, format!("omega = {omega}: relative residual {:.2e}", r.max_relative_residual)))
}

fn recession_limit(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let i = 3;
    let op = ConvexOperator::counterexample_family(i, &[0.0, 1.0, 2.0, 3.0])?;
    let ell = EllipticityPair::new(1.0, 2.0 - 1.0 / (i as f64 + 1.0))?;
    let mu = 1e9;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (a, b, c): (f64, f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let norm = (a * a + 2.0 * b * b + c * c).sqrt();
        let m = SymMat2::new(a / norm, b / norm, c / norm);
        let big = SymMat2::new(mu * m.m11, mu * m.m12, mu * m.m22);
        worst = worst.max((op.eval(&big) / mu - pucci_plus(&m, ell)).abs());
    }
    Ok((worst <= 1e-6, format!("max deviation {worst:.2e}")))
}

fn stencil_exactness() -> Outcome {
    let op = ConvexOperator::pucci_plus(EllipticityPair::new(1.0, 2.0)?);
    let spec = ObstacleProblemSpec::new(33, BoundaryData::function(|x1, _| x1 * x1), op, 16)?;
    let d = Discretization::new(&spec)?;
    let grid = spec.grid;
    let mut u = vec![0.0; grid.len()];
    for j in 0..grid.n() {
        for i in 0..grid.n() {
            u[grid.index(i, j)] = grid.coord(i).powi(2);
        }
    }
    let v = d.operator_at(&u, 16, 10);
    Ok(((v - 4.0).abs() <= 1e-9, format!("F_h(x1^2) = {v}")))
}

fn small_solve(n: usize, op: ConvexOperator) -> Outcome {
    let spec = ObstacleProblemSpec::new(n, BoundaryData::Thm17, op, 16)?;
    let r = solve_thin_obstacle(&spec, &SolverConfig::default())?;
    let rep = residual_report(&r, &spec)?;
    let z = find_free_boundary(&r)?;
    let ok = rep.thin_monotone && rep.min_dx1_difference >= -1e-10 && rep.symmetry_defect <= 1e-8;
    Ok((ok, format!("n = {n}: z = {z:.4}, residual {:.2e}", rep.residual_interior)))
}

fn synthetic_exponent() -> Outcome {
    let grid = Grid2D::new(257)?;
    let beta = 1.5;
    let mut u = vec![0.0; grid.len()];
    for j in 0..grid.n() {
        for i in 0..grid.n() {
            let (x1, x2) = (grid.coord(i), grid.coord(j));
            u[grid.index(i, j)] = x1.hypot(x2).powf(beta) * (0.5 * x2.atan2(-x1)).sin().abs();
        }
    }
    let fit = estimate_exponent_field(grid, &u, 0.0, 0.4, 0.04, ExponentOptions::default())?;
    Ok(((fit.global_slope - beta).abs() <= 0.01, format!("slope {:.4}", fit.global_slope)))
}

fn ratio_scaling() -> Outcome {
    let b: Vec<f64> = (1..50).map(|k| k as f64 * 0.1).collect();
    let a: Vec<f64> = b.iter().map(|v| 2.0 * v).collect();
    let region: Vec<usize> = (0..b.len()).collect();
    let (lo, hi) = comparability_check(&a, &b, &region)?;
    Ok((lo == 2.0 && hi == 2.0, format!("ratios [{lo}, {hi}]")))
}

fn laplacian_exponent() -> Outcome {
    let spec = ObstacleProblemSpec::new(129, BoundaryData::Thm17, ConvexOperator::laplacian(), 16)?;
    let r = solve_thin_obstacle(&spec, &SolverConfig::default())?;
    let z = find_free_boundary(&r)?;
    let fit = estimate_exponent_field(
        r.grid(),
        &r.u,
        z,
        thinfree::analysis::default_r_max(z),
        4.0 * r.grid().h(),
        ExponentOptions::default(),
    )?;
    Ok(((fit.global_slope - 1.5).abs() <= 0.1, format!("n = 129: slope {:.4}", fit.global_slope)))
}

fn family_monotone() -> Outcome {
    let config = SolverConfig::default();
    let lap = ObstacleProblemSpec::new(65, BoundaryData::Thm17, ConvexOperator::laplacian(), 16)?;
    let fam =
        ObstacleProblemSpec::new(65, BoundaryData::Thm17, ConvexOperator::counterexample_family(1, &[0.0, 2.0])?, 16)?;
    let u0 = solve_thin_obstacle(&lap, &config)?;
    let u1 = solve_thin_obstacle(&fam, &config)?;
    let worst = u1.u.iter().zip(&u0.u).map(|(a, b)| b - a).fold(f64::NEG_INFINITY, f64::max);
    Ok((worst <= 1e-10, format!("max(u0 - u1) = {worst:.2e}")))
}

fn check(name: &'static str, outcome: Outcome) -> Check {
    match outcome {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: e.to_string() },
    }
}

/// Runs the checks of a suite.
pub fn checks(suite: Suite, seed: u64) -> Vec<Check> {
    let pucci = || ConvexOperator::pucci_plus(EllipticityPair::new(1.0, 2.0).expect("valid pair"));
    let mut out = vec![
        check("exponents.alpha_at_one", alpha_at_one()),
        check("exponents.alpha_limit", alpha_limit()),
        check("exponents.alpha_monotone", alpha_monotone()),
        check("profiles.apertures", apertures(2.0)),
        check("profiles.residual", profile_residual(1.0)),
        check("operators.recession_limit", recession_limit(seed)),
        check("fdsolver.stencil_exactness", stencil_exactness()),
        check("fdsolver.thm17_structure", small_solve(33, pucci())),
        check("analysis.synthetic_exponent", synthetic_exponent()),
        check("analysis.ratio_scaling", ratio_scaling()),
    ];
    if suite == Suite::Full {
        out.extend([
            check("profiles.apertures_omega5", apertures(5.0)),
            check("profiles.residual_omega2", profile_residual(2.0)),
            check("fdsolver.thm17_structure_fine", small_solve(129, pucci())),
            check("fdsolver.family_monotone", family_monotone()),
            check("analysis.laplacian_exponent", laplacian_exponent()),
        ]);
    }
    out
}

pub fn run(suite: Suite, seed: u64) -> Result<(), CliError> {
    let results = checks(suite, seed);
    let failed = results.iter().filter(|c| !c.passed).count();
    for c in &results {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if failed > 0 {
        return Err(CliError::Failed(failed));
    }
    Ok(())
}
