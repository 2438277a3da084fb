//! Growth exponents at free boundary points, the scale-dependent exponent
//! experiment for non-homogeneous operators, and ratio checks between fields.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::exponents::alpha_pucci;
use crate::fdsolver::{solve_thin_obstacle, BoundaryData, Grid2D, ObstacleProblemSpec, SolveResult, SolverConfig};
use crate::operators::ConvexOperator;
use crate::profiles::{eval_profile, profile_gradient, BlowupProfile};

/// Ordinary least-squares line `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub rms: f64,
}

/// Least-squares line through `(x, y)` points. Needs two distinct abscissae.
pub fn least_squares(pts: &[(f64, f64)]) -> LineFit {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    LineFit { slope, intercept, rms: (ss / n).sqrt() }
}

/// Thin-line values at or below this level count as contact.
pub const CONTACT_LEVEL: f64 = 1e-10;

/// Free boundary point on the thin line: the last contact node before the
/// thin line turns positive, refined by [`refine_free_boundary`] when enough
/// positive nodes follow it.
pub fn find_free_boundary(result: &SolveResult) -> Result<f64> {
    free_boundary_of_field(result.grid(), &result.u)
}

/// [`find_free_boundary`] on a bare grid field.
pub fn free_boundary_of_field(grid: Grid2D, u: &[f64]) -> Result<f64> {
    let z = last_contact_node(grid, u)?;
    Ok(refine_free_boundary(grid, u, z).unwrap_or(z))
}

/// Abscissa of the last contact node before the thin line turns positive.
pub fn last_contact_node(grid: Grid2D, u: &[f64]) -> Result<f64> {
    if u.len() != grid.len() {
        return param(format!("field has {} values, grid needs {}", u.len(), grid.len()));
    }
    let j = grid.thin_row();
    let line: Vec<(f64, f64)> = (0..grid.n()).map(|i| (grid.coord(i), u[grid.index(i, j)])).collect();
    for w in line.windows(2) {
        if w[1].1 < w[0].1 - 1e-10 {
            return Err(Error::MonotonicityViolated { x1: w[1].0, drop: w[0].1 - w[1].1 });
        }
    }
    let interior = &line[1..line.len() - 1];
    match interior.iter().position(|p| p.1 > CONTACT_LEVEL) {
        None => Err(Error::NoFreeBoundary("thin line is identically zero".into())),
        Some(0) => Err(Error::NoFreeBoundary("thin line is positive everywhere".into())),
        Some(k) => Ok(interior[k - 1].0),
    }
}

/// Positive thin-line nodes used by [`refine_free_boundary`].
pub const REFINE_NODES: usize = 8;

/// Sub-node free boundary point: fits `a (x1 - z)^beta` to the first positive
/// thin-line values past the last contact node `z_node`, with `z` in
/// `[z_node, z_node + h)`.
pub fn refine_free_boundary(grid: Grid2D, u: &[f64], z_node: f64) -> Result<f64> {
    let h = grid.h();
    let j = grid.thin_row();
    let i0 = ((z_node + 1.0) / h).round() as usize;
    if i0 + REFINE_NODES >= grid.n() - 1 {
        return Err(Error::NoFreeBoundary("too few positive thin-line nodes".into()));
    }
    let pts: Vec<(f64, f64)> = (1..=REFINE_NODES).map(|k| (grid.coord(i0 + k), u[grid.index(i0 + k, j)])).collect();
    if pts.iter().any(|p| !(p.1 > 0.0)) {
        return Err(Error::NoFreeBoundary("thin line is not positive past the contact set".into()));
    }
    let misfit = |z: f64| {
        let logs: Vec<(f64, f64)> = pts.iter().map(|&(x, v)| ((x - z).ln(), v.ln())).collect();
        least_squares(&logs).rms
    };
    let lo = z_node;
    let hi = z_node + h * (1.0 - 1e-6);
    let scan = 64;
    let best = (0..=scan)
        .map(|k| lo + (hi - lo) * k as f64 / scan as f64)
        .min_by(|a, b| misfit(*a).total_cmp(&misfit(*b)))
        .unwrap_or(lo);
    let step = (hi - lo) / scan as f64;
    let (mut a, mut b) = ((best - step).max(lo), (best + step).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if misfit(c) < misfit(d) {
            b = d;
        } else {
            a = c;
        }
    }
    Ok(0.5 * (a + b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentOptions {
    /// Radii per factor of two; `1` gives the dyadic sequence.
    pub radii_per_octave: usize,
    /// Subtract `c x2` with `c` from the two nodes next to `z` off the line.
    pub subtract_plane: bool,
}

impl Default for ExponentOptions {
    fn default() -> Self {
        Self { radii_per_octave: 1, subtract_plane: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub z: f64,
    /// Strictly decreasing.
    pub radii: Vec<f64>,
    /// `sup |u|` over the grid nodes in `B_r((z, 0))`.
    pub sup_values: Vec<f64>,
    /// Least-squares slope of `log sup` against `log r`.
    pub global_slope: f64,
    /// `(center radius, slope)` over sliding windows of three radii.
    pub local_slopes: Vec<(f64, f64)>,
    pub r_range: (f64, f64),
    pub fit_residual: f64,
}

/// Fits `sup_{B_r(z)} |u| ~ r^(1 + alpha)` over radii in `[r_min, r_max]`.
pub fn estimate_exponent(
    result: &SolveResult,
    z: f64,
    r_max: f64,
    r_min: f64,
    options: ExponentOptions,
) -> Result<ExponentFit> {
    estimate_exponent_field(result.grid(), &result.u, z, r_max, r_min, options)
}

/// [`estimate_exponent`] on a bare grid field.
pub fn estimate_exponent_field(
    grid: Grid2D,
    u: &[f64],
    z: f64,
    r_max: f64,
    r_min: f64,
    options: ExponentOptions,
) -> Result<ExponentFit> {
    let h = grid.h();
    if u.len() != grid.len() {
        return param(format!("field has {} values, grid needs {}", u.len(), grid.len()));
    }
    if r_min < 4.0 * h * (1.0 - 1e-12) {
        return param(format!("r_min = {r_min} is below 4h = {}", 4.0 * h));
    }
    let reach = 1.0 - z.abs();
    if r_max > 0.5 * reach * (1.0 + 1e-12) {
        return param(format!("r_max = {r_max} exceeds half the distance {reach} to the boundary"));
    }
    if options.radii_per_octave == 0 {
        return param("radii_per_octave must be positive");
    }
    let plane = if options.subtract_plane {
        let iz = ((z + 1.0) / h).round() as usize;
        let j = grid.thin_row();
        let up = u[grid.index(iz, j + 1)];
        let down = u[grid.index(iz, j - 1)];
        0.5 * (up - down) / h
    } else {
        0.0
    };
    let step = 2f64.powf(-1.0 / options.radii_per_octave as f64);
    let mut radii = Vec::new();
    let mut r = r_max;
    while r >= r_min * (1.0 - 1e-12) {
        radii.push(r);
        r *= step;
    }
    let sup_values: Vec<f64> = radii.par_iter().map(|&r| ball_sup(grid, u, z, r, plane)).collect();
    let pts: Vec<(f64, f64)> =
        radii.iter().zip(&sup_values).filter(|(_, &s)| s > 0.0).map(|(r, s)| (r.ln(), s.ln())).collect();
    if pts.len() < 4 {
        return Err(Error::InsufficientScales { found: pts.len(), needed: 4 });
    }
    let fit = least_squares(&pts);
    let local_slopes = pts.windows(3).map(|w| (w[1].0.exp(), least_squares(w).slope)).collect();
    Ok(ExponentFit {
        z,
        r_range: (radii[radii.len() - 1], radii[0]),
        radii,
        sup_values,
        global_slope: fit.slope,
        local_slopes,
        fit_residual: fit.rms,
    })
}

/// `sup |u - plane x2|` over the nodes of `B_r((z, 0))` and over bilinear
/// samples on its boundary circle, clipped to the square.
fn ball_sup(grid: Grid2D, u: &[f64], z: f64, r: f64, plane: f64) -> f64 {
    let nodes = grid
        .nodes_within((z, 0.0), r)
        .map(|(i, j)| (u[grid.index(i, j)] - plane * grid.coord(j)).abs())
        .fold(0.0f64, f64::max);
    let m = ((2.0 * std::f64::consts::PI * r / grid.h()).ceil() as usize * 4).max(64);
    (0..m)
        .filter_map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
            let (x1, x2) = (z + r * t.cos(), r * t.sin());
            (x1.abs() <= 1.0 && x2.abs() <= 1.0).then(|| (grid.interpolate(u, x1, x2) - plane * x2).abs())
        })
        .fold(nodes, f64::max)
}

/// Slope of `log sup` against `log r` over the radii in `[lo, hi]`.
pub fn window_slope(fit: &ExponentFit, lo: f64, hi: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = fit
        .radii
        .iter()
        .zip(&fit.sup_values)
        .filter(|(r, s)| **r >= lo * (1.0 - 1e-12) && **r <= hi * (1.0 + 1e-12) && **s > 0.0)
        .map(|(r, s)| (r.ln(), s.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientScales { found: pts.len(), needed: 3 });
    }
    Ok(least_squares(&pts).slope)
}

/// Default largest radius: `min(0.4, dist(z, boundary) / 2)`.
pub fn default_r_max(z: f64) -> f64 {
    (0.5 * (1.0 - z.abs())).min(0.4)
}

/// The family `max_j (P+_{1,Lambda_j} - offsets[j])` solved with the corner
/// data `+1` on `{x1 = 1}` and `-1` elsewhere on the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleScenario {
    pub lambdas: Vec<f64>,
    pub offsets: Vec<f64>,
    pub n: usize,
    pub directions: usize,
    /// `None` uses [`default_r_max`].
    pub r_max: Option<f64>,
    /// `None` uses `4h`.
    pub r_min: Option<f64>,
    pub radii_per_octave: usize,
    pub config: SolverConfig,
    /// Change of slope between the coarse and fine decades that counts as
    /// scale dependence.
    pub threshold: f64,
}

impl CounterexampleScenario {
    /// The `i = 1` family `max(trace, P+_{1,Lambda1} - offset)`.
    pub fn two_term(lambda1: f64, offset: f64, n: usize) -> Self {
        Self {
            lambdas: vec![1.0, lambda1],
            offsets: vec![0.0, offset],
            n,
            directions: 16,
            r_max: None,
            r_min: None,
            radii_per_octave: 4,
            config: SolverConfig::default(),
            threshold: SCALE_THRESHOLD,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.lambdas.len() < 2 || self.lambdas.len() != self.offsets.len() {
            return param("scenario needs at least two terms with matching offsets");
        }
        if self.lambdas[0] < 1.0 || self.lambdas.windows(2).any(|w| !(w[1] > w[0])) {
            return param("scenario Lambdas must be increasing and at least 1");
        }
        if self.lambdas.iter().any(|&l| !(l < 2.0)) {
            return param("scenario Lambdas must lie below 2");
        }
        if self.offsets[0] != 0.0 || self.offsets.iter().any(|&c| !(c >= 0.0 && c.is_finite())) {
            return param("scenario offsets must be finite and nonnegative with the first equal to 0");
        }
        Ok(())
    }

    pub fn operator(&self) -> Result<ConvexOperator> {
        ConvexOperator::pucci_family(&self.lambdas, &self.offsets)
    }
}

/// Default [`CounterexampleScenario::threshold`].
pub const SCALE_THRESHOLD: f64 = 0.03;

/// Tolerance for the fine-decade slope against the recession exponent.
pub const RECESSION_SLOPE_TOLERANCE: f64 = 0.08;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub fit: ExponentFit,
    /// Slope over the radii in `[r_max / 10, r_max]`.
    pub coarse_slope: f64,
    /// Slope over the radii in `[r_min, 10 r_min]`.
    pub fine_slope: f64,
    /// `1 + alpha(Lambda_last)`, the exponent of the recession operator.
    pub recession_exponent: f64,
    /// `fine_slope - coarse_slope`.
    pub slope_change: f64,
    /// Largest minus smallest three-point local slope.
    pub local_spread: f64,
    pub scale_dependent: bool,
    pub fine_near_recession: bool,
    pub residual_interior: f64,
    pub complementarity_gap: f64,
}

/// Solves the scenario and compares growth rates across scales.
pub fn run_counterexample(scenario: &CounterexampleScenario) -> Result<CounterexampleReport> {
    scenario.validate()?;
    let spec = ObstacleProblemSpec::new(scenario.n, BoundaryData::Thm17, scenario.operator()?, scenario.directions)?;
    let result = solve_thin_obstacle(&spec, &scenario.config)?;
    counterexample_report(scenario, &result)
}

/// Slope report of a solution of the scenario.
pub fn counterexample_report(scenario: &CounterexampleScenario, result: &SolveResult) -> Result<CounterexampleReport> {
    scenario.validate()?;
    let z = find_free_boundary(result)?;
    let r_max = scenario.r_max.unwrap_or_else(|| default_r_max(z));
    let r_min = scenario.r_min.unwrap_or(4.0 * result.grid().h());
    let fit = estimate_exponent(
        result,
        z,
        r_max,
        r_min,
        ExponentOptions { radii_per_octave: scenario.radii_per_octave, subtract_plane: false },
    )?;
    let coarse_slope = window_slope(&fit, r_max / 10.0, r_max)?;
    let fine_slope = window_slope(&fit, r_min, 10.0 * r_min)?;
    let lambda_top = scenario.lambdas[scenario.lambdas.len() - 1];
    let recession_exponent = 1.0 + alpha_pucci(lambda_top)?.alpha;
    let slopes = fit.local_slopes.iter().map(|s| s.1);
    let hi = slopes.clone().fold(f64::NEG_INFINITY, f64::max);
    let lo = slopes.fold(f64::INFINITY, f64::min);
    Ok(CounterexampleReport {
        coarse_slope,
        fine_slope,
        recession_exponent,
        slope_change: fine_slope - coarse_slope,
        local_spread: hi - lo,
        scale_dependent: (fine_slope - coarse_slope).abs() >= scenario.threshold,
        fine_near_recession: (fine_slope - recession_exponent).abs() <= RECESSION_SLOPE_TOLERANCE,
        residual_interior: result.residual_interior,
        complementarity_gap: result.complementarity_gap,
        fit,
    })
}

/// Floor on the denominator in [`comparability_check`].
pub const RATIO_FLOOR: f64 = 1e-12;

/// `(min, max)` of `a / b` over the region nodes with `b >= RATIO_FLOOR`.
pub fn comparability_check(a: &[f64], b: &[f64], region: &[usize]) -> Result<(f64, f64)> {
    if a.len() != b.len() {
        return param(format!("fields differ in length: {} vs {}", a.len(), b.len()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &k in region {
        if k >= a.len() {
            return param(format!("region index {k} out of range"));
        }
        if b[k] >= RATIO_FLOOR {
            let q = a[k] / b[k];
            lo = lo.min(q);
            hi = hi.max(q);
        }
    }
    if lo > hi {
        return Err(Error::DegenerateRegion);
    }
    Ok((lo, hi))
}

/// Central difference in `x1` at interior nodes, zero on the boundary.
pub fn dx1_field(grid: Grid2D, u: &[f64]) -> Vec<f64> {
    let n = grid.n();
    let h = grid.h();
    let mut out = vec![0.0; grid.len()];
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            out[grid.index(i, j)] = (u[grid.index(i + 1, j)] - u[grid.index(i - 1, j)]) / (2.0 * h);
        }
    }
    out
}

/// Interior nodes of the annulus `r_in <= |x - (z, 0)| <= r_out` at distance
/// at least `strip` from the thin line.
pub fn annulus_region(grid: Grid2D, z: f64, r_in: f64, r_out: f64, strip: f64) -> Vec<usize> {
    grid.nodes_within((z, 0.0), r_out)
        .filter(|&(i, j)| {
            let (x1, x2) = (grid.coord(i), grid.coord(j));
            !grid.is_boundary(i, j) && (x1 - z).hypot(x2) >= r_in && x2.abs() >= strip
        })
        .map(|(i, j)| grid.index(i, j))
        .collect()
}

/// Extremal ratios of `d u / d x1` to `d/dx1` of the profile translated to
/// `(z, 0)`, over the interior nodes of `B_radius(z)`. The profile is first
/// scaled so both fields have the same supremum on the ball.
pub fn profile_comparability(
    grid: Grid2D,
    u: &[f64],
    profile: &BlowupProfile,
    z: f64,
    radius: f64,
) -> Result<(f64, f64)> {
    if u.len() != grid.len() {
        return param(format!("field has {} values, grid has {}", u.len(), grid.len()));
    }
    if !(radius > 0.0) {
        return param(format!("radius must be positive, got {radius}"));
    }
    let nodes: Vec<(usize, usize)> = grid.nodes_within((z, 0.0), radius).collect();
    let sup_u = nodes.iter().map(|&(i, j)| u[grid.index(i, j)].abs()).fold(0.0, f64::max);
    let sup_p =
        nodes.iter().map(|&(i, j)| eval_profile(profile, grid.coord(i) - z, grid.coord(j)).abs()).fold(0.0, f64::max);
    if sup_p == 0.0 {
        return Err(Error::DegenerateRegion);
    }
    let scale = sup_u / sup_p;
    let mut dp = vec![0.0; grid.len()];
    for &(i, j) in &nodes {
        dp[grid.index(i, j)] = scale * profile_gradient(profile, grid.coord(i) - z, grid.coord(j))[0];
    }
    let region = annulus_region(grid, z, 0.0, radius, 0.0);
    comparability_check(&dx1_field(grid, u), &dp, &region)
}
