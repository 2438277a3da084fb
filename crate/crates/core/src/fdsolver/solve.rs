use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{BoundaryData, Grid2D};
use super::linear::{bicgstab, CsrMatrix, Ilu0};
use super::stencil::{build_stencil, GridStencil, Source};
use crate::error::{param, Error, Result};
use crate::operators::ConvexOperator;

const UNSET: u16 = u16::MAX;
const CONTACT: u16 = u16::MAX - 1;
const POLICY_SLACK: f64 = 1e-9;
const MAX_KRYLOV: usize = 20_000;

/// Grid, boundary data, operator and direction count of one solve.
#[derive(Debug, Clone)]
pub struct ObstacleProblemSpec {
    pub grid: Grid2D,
    pub boundary: BoundaryData,
    pub operator: ConvexOperator,
    pub directions: usize,
}

impl ObstacleProblemSpec {
    pub fn new(n: usize, boundary: BoundaryData, operator: ConvexOperator, directions: usize) -> Result<Self> {
        Ok(Self { grid: Grid2D::new(n)?, boundary, operator, directions })
    }

    fn on_grid(&self, grid: Grid2D) -> Self {
        Self { grid, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Method {
    /// Projected nonlinear SOR in lexicographic order. `None` picks
    /// `2 / (1 + sin(pi h / 2))`.
    Sor { relaxation: Option<f64> },
    /// Policy iteration: freeze the maximizing branch at every node (and the
    /// contact/no-contact choice on the thin line), solve the linear system
    /// with ILU(0)-preconditioned BiCGSTAB, repeat until the policy is stable.
    Howard,
    /// Explicit pseudo-time stepping `u <- u + tau F_h(u)` with Jacobi
    /// updates, projected on the thin line. `None` uses the stability bound.
    PseudoTime { tau: Option<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    /// Stop once the largest update falls below `tol * h^2` ...
    pub tol: f64,
    /// ... and the interior residual and complementarity gap are below these.
    pub tol_residual: f64,
    pub tol_complementarity: f64,
    /// Cap per grid level on sweeps (SOR, pseudo-time) or policy iterations.
    pub max_iterations: usize,
    /// Solve on successively halved grids first and interpolate.
    pub nested: bool,
    /// Smallest grid size used when `nested` is set.
    pub coarsest: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::Howard,
            tol: 1e-8,
            tol_residual: 1e-6,
            tol_complementarity: 1e-6,
            max_iterations: 200_000,
            nested: true,
            coarsest: 17,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub n: usize,
    pub sweeps: usize,
    pub last_update: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub n: usize,
    /// Row-major field, index `j * n + i`.
    pub u: Vec<f64>,
    pub residual_interior: f64,
    pub complementarity_gap: f64,
    /// Sweeps on the finest grid.
    pub iterations: usize,
    pub last_update: f64,
    pub levels: Vec<LevelStats>,
    /// Free boundary point on the thin line, when one exists.
    pub fb_point: Option<f64>,
}

impl SolveResult {
    pub fn grid(&self) -> Grid2D {
        Grid2D::new(self.n).expect("result grids are valid")
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.u[j * self.n + i]
    }

    /// `(x1, u)` along the thin line.
    pub fn thin_line(&self) -> Vec<(f64, f64)> {
        let g = self.grid();
        let j = g.thin_row();
        (0..self.n).map(|i| (g.coord(i), self.at(i, j))).collect()
    }
}

/// A problem compiled to its grid.
#[derive(Debug, Clone)]
pub struct Discretization {
    stencil: GridStencil,
    boundary: BoundaryData,
}

impl Discretization {
    pub fn new(spec: &ObstacleProblemSpec) -> Result<Self> {
        let stencil = build_stencil(&spec.operator, spec.directions)?;
        Ok(Self { stencil: GridStencil::new(stencil, spec.grid, &spec.boundary), boundary: spec.boundary.clone() })
    }

    pub fn grid(&self) -> Grid2D {
        self.stencil.grid()
    }

    pub fn boundary_field(&self) -> Vec<f64> {
        self.boundary.fill(self.grid())
    }

    fn scratch(&self) -> Vec<(f64, f64)> {
        vec![(0.0, 0.0); self.stencil.direction_count()]
    }

    /// `F_h(u)` at an interior node.
    pub fn operator_at(&self, u: &[f64], i: usize, j: usize) -> f64 {
        let g = self.grid();
        let mut sk = self.scratch();
        let idx = g.index(i, j);
        self.stencil.gather(u, idx, &mut sk);
        self.stencil.stencil().apply(&sk, u[idx], g.h() * g.h())
    }

    /// `F_h(u)` at every interior node, zero on the boundary.
    pub fn operator_field(&self, u: &[f64]) -> Vec<f64> {
        let g = self.grid();
        let n = g.n();
        let mut out = vec![0.0; g.len()];
        out.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
            if j == 0 || j == n - 1 {
                return;
            }
            for (i, v) in row.iter_mut().enumerate().take(n - 1).skip(1) {
                *v = self.operator_at(u, i, j);
            }
        });
        out
    }

    /// Largest stable pseudo-time step: `h^2` over the largest diagonal
    /// coefficient.
    pub fn stability_bound(&self) -> f64 {
        let g = self.grid();
        let n = g.n();
        let zero = vec![0.0; g.len()];
        let mut sk = self.scratch();
        let mut worst = 0.0f64;
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                self.stencil.gather(&zero, g.index(i, j), &mut sk);
                worst = worst.max(self.stencil.stencil().diagonal_bound(&sk));
            }
        }
        g.h() * g.h() / worst
    }

    /// `(interior residual, complementarity gap)`.
    fn residuals(&self, u: &[f64]) -> (f64, f64) {
        let g = self.grid();
        let n = g.n();
        let f = self.operator_field(u);
        let mut interior = 0.0f64;
        let mut gap = 0.0f64;
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                let idx = g.index(i, j);
                if j == g.thin_row() {
                    gap = gap.max((-f[idx]).min(u[idx]).abs());
                } else {
                    interior = interior.max(f[idx].abs());
                }
            }
        }
        (interior, gap)
    }

    fn sor_sweep(&self, u: &mut [f64], relaxation: f64, sk: &mut [(f64, f64)]) -> f64 {
        let g = self.grid();
        let (n, thin, h2) = (g.n(), g.thin_row(), g.h() * g.h());
        let st = self.stencil.stencil();
        let mut largest = 0.0f64;
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                let idx = j * n + i;
                self.stencil.gather(u, idx, sk);
                let target = st.solve_point(sk, h2);
                let mut next = u[idx] + relaxation * (target - u[idx]);
                if j == thin {
                    next = next.max(0.0);
                }
                largest = largest.max((next - u[idx]).abs());
                u[idx] = next;
            }
        }
        largest
    }

    fn pseudo_time_step(&self, u: &[f64], next: &mut [f64], tau: f64) -> f64 {
        let g = self.grid();
        let (n, thin, h2) = (g.n(), g.thin_row(), g.h() * g.h());
        let st = self.stencil.stencil();
        next.par_chunks_mut(n)
            .enumerate()
            .map(|(j, row)| {
                if j == 0 || j == n - 1 {
                    row.copy_from_slice(&u[j * n..(j + 1) * n]);
                    return 0.0;
                }
                let mut sk = self.scratch();
                let mut largest = 0.0f64;
                row[0] = u[j * n];
                row[n - 1] = u[j * n + n - 1];
                for i in 1..n - 1 {
                    let idx = j * n + i;
                    self.stencil.gather(u, idx, &mut sk);
                    let mut v = u[idx] + tau * st.apply(&sk, u[idx], h2);
                    if j == thin {
                        v = v.max(0.0);
                    }
                    largest = largest.max((v - u[idx]).abs());
                    row[i] = v;
                }
                largest
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Refreshes the policy, keeping the current choice unless another one is
    /// larger by more than `POLICY_SLACK`. Returns the number of changes.
    fn update_policy(&self, u: &[f64], policy: &mut [u16], sk: &mut [(f64, f64)]) -> usize {
        let g = self.grid();
        let (n, thin, h2) = (g.n(), g.thin_row(), g.h() * g.h());
        let st = self.stencil.stencil();
        let mut changed = 0;
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                let idx = j * n + i;
                self.stencil.gather(u, idx, sk);
                let value = |b: u16| {
                    if b == CONTACT {
                        -u[idx]
                    } else {
                        st.branch_value(b as usize, sk, u[idx], h2)
                    }
                };
                let mut best = (st.active_branch(sk, u[idx], h2) as u16, 0.0);
                best.1 = value(best.0);
                if j == thin && -u[idx] > best.1 {
                    best = (CONTACT, -u[idx]);
                }
                let current = policy[idx];
                if current == UNSET || value(current) < best.1 - POLICY_SLACK {
                    if current != best.0 {
                        changed += 1;
                    }
                    policy[idx] = best.0;
                }
            }
        }
        changed
    }

    /// Linear system `A u = b` of a frozen policy, scaled by `h^2`.
    fn assemble(&self, policy: &[u16]) -> (CsrMatrix, Vec<f64>) {
        let g = self.grid();
        let (n, h2) = (g.n(), g.h() * g.h());
        let st = self.stencil.stencil();
        let boundary = self.boundary_field();
        let mut a = CsrMatrix::with_capacity(g.len(), 5 * g.len());
        let mut b = vec![0.0; g.len()];
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(5);
        for j in 0..n {
            for i in 0..n {
                let idx = j * n + i;
                row.clear();
                if g.is_boundary(i, j) || policy[idx] == CONTACT {
                    row.push((idx, 1.0));
                    b[idx] = if g.is_boundary(i, j) { boundary[idx] } else { 0.0 };
                    a.push_row(&mut row);
                    continue;
                }
                let br = st.branches()[policy[idx] as usize];
                let mut diag = 0.0;
                let mut rhs = br.offset * h2;
                for (d, coef) in [(br.a, br.x), (br.b, br.y)] {
                    for (w, src) in self.stencil.arms(idx, d) {
                        diag += coef * w;
                        match src {
                            Source::Node(m) => row.push((m, -coef * w)),
                            Source::Value(v) => rhs += coef * w * v,
                        }
                    }
                }
                row.push((idx, diag));
                b[idx] = rhs;
                a.push_row(&mut row);
            }
        }
        (a, b)
    }

    fn howard(&self, u: &mut [f64], config: &SolverConfig) -> Result<LevelStats> {
        let g = self.grid();
        let h2 = g.h() * g.h();
        if self.stencil.stencil().branches().len() >= CONTACT as usize {
            return param("too many stencil branches for policy iteration");
        }
        let mut sk = self.scratch();
        let mut policy = vec![UNSET; g.len()];
        let mut last = f64::INFINITY;
        let mut residual = f64::INFINITY;
        let linear_tol = 1e-2 * config.tol_residual * h2;
        for it in 1..=config.max_iterations {
            let changed = self.update_policy(u, &mut policy, &mut sk);
            if changed == 0 && it > 1 {
                let (r, c) = self.residuals(u);
                residual = r.max(c);
                if r <= config.tol_residual && c <= config.tol_complementarity {
                    return Ok(LevelStats { n: g.n(), sweeps: it - 1, last_update: last });
                }
                return Err(Error::NonConvergence { iterations: it - 1, last_update: last, residual });
            }
            let (a, b) = self.assemble(&policy);
            let ilu = Ilu0::new(&a)?;
            let mut x = u.to_vec();
            bicgstab(&a, &ilu, &b, &mut x, linear_tol, MAX_KRYLOV)?;
            last = x.iter().zip(u.iter()).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
            u.copy_from_slice(&x);
        }
        Err(Error::NonConvergence { iterations: config.max_iterations, last_update: last, residual })
    }

    /// Iterates from `u` until converged.
    fn iterate(&self, u: &mut Vec<f64>, config: &SolverConfig) -> Result<LevelStats> {
        let g = self.grid();
        let h = g.h();
        let threshold = config.tol * h * h;
        let mut sk = self.scratch();
        let mut spare = u.clone();
        let tau = match config.method {
            Method::PseudoTime { tau } => {
                let bound = self.stability_bound();
                let tau = tau.unwrap_or(bound);
                if !(tau > 0.0 && tau <= bound * (1.0 + 1e-12)) {
                    return param(format!("pseudo-time step {tau:e} outside (0, {bound:e}]"));
                }
                tau
            }
            _ => 0.0,
        };
        let relaxation = match config.method {
            Method::Sor { relaxation } => {
                let w = relaxation.unwrap_or(2.0 / (1.0 + (PI * h / 2.0).sin()));
                if !(w > 0.0 && w < 2.0) {
                    return param(format!("relaxation factor must lie in (0, 2), got {w}"));
                }
                w
            }
            _ => 1.0,
        };
        let mut last = f64::INFINITY;
        let mut residual = f64::INFINITY;
        if let Method::Howard = config.method {
            return self.howard(u, config);
        }
        for sweep in 1..=config.max_iterations {
            last = match config.method {
                Method::Sor { .. } | Method::Howard => self.sor_sweep(u, relaxation, &mut sk),
                Method::PseudoTime { .. } => {
                    let d = self.pseudo_time_step(u, &mut spare, tau);
                    std::mem::swap(u, &mut spare);
                    d
                }
            };
            if !last.is_finite() {
                return Err(Error::NonConvergence { iterations: sweep, last_update: last, residual });
            }
            if last < threshold {
                let (r, c) = self.residuals(u);
                residual = r.max(c);
                if r <= config.tol_residual && c <= config.tol_complementarity {
                    return Ok(LevelStats { n: g.n(), sweeps: sweep, last_update: last });
                }
            }
        }
        Err(Error::NonConvergence { iterations: config.max_iterations, last_update: last, residual })
    }
}

fn prolong(coarse: &[f64], m: usize) -> Vec<f64> {
    let n = 2 * m - 1;
    let mut fine = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            let (ci, cj) = (i / 2, j / 2);
            let at = |a: usize, b: usize| coarse[b * m + a];
            fine[j * n + i] = match (i % 2, j % 2) {
                (0, 0) => at(ci, cj),
                (1, 0) => 0.5 * (at(ci, cj) + at(ci + 1, cj)),
                (0, 1) => 0.5 * (at(ci, cj) + at(ci, cj + 1)),
                _ => 0.25 * (at(ci, cj) + at(ci + 1, cj) + at(ci, cj + 1) + at(ci + 1, cj + 1)),
            };
        }
    }
    fine
}

/// Solves the discrete thin obstacle problem.
pub fn solve_thin_obstacle(spec: &ObstacleProblemSpec, config: &SolverConfig) -> Result<SolveResult> {
    if !(config.tol > 0.0 && config.tol_residual > 0.0 && config.tol_complementarity > 0.0) {
        return param("solver tolerances must be positive");
    }
    let n = spec.grid.n();
    let mut sizes = vec![n];
    if config.nested {
        let mut m = n;
        while (m - 1) % 2 == 0 && (m - 1) / 2 + 1 >= config.coarsest.max(5) && ((m - 1) / 2) % 2 == 0 {
            m = (m - 1) / 2 + 1;
            sizes.push(m);
        }
    }
    sizes.reverse();

    let mut levels = Vec::with_capacity(sizes.len());
    let mut u: Vec<f64> = Vec::new();
    let mut disc = None;
    for (k, &m) in sizes.iter().enumerate() {
        let grid = Grid2D::new(m)?;
        let d = Discretization::new(&spec.on_grid(grid))?;
        let boundary = d.boundary_field();
        u = if k == 0 { boundary.clone() } else { prolong(&u, sizes[k - 1]) };
        for j in 0..m {
            for i in 0..m {
                if grid.is_boundary(i, j) {
                    u[grid.index(i, j)] = boundary[grid.index(i, j)];
                } else if j == grid.thin_row() {
                    u[grid.index(i, j)] = u[grid.index(i, j)].max(0.0);
                }
            }
        }
        levels.push(d.iterate(&mut u, config)?);
        let j = grid.thin_row();
        for i in 1..m - 1 {
            let k = grid.index(i, j);
            u[k] = u[k].max(0.0);
        }
        disc = Some(d);
    }
    let disc = disc.expect("at least one level");
    let (residual_interior, complementarity_gap) = disc.residuals(&u);
    let finest = levels[levels.len() - 1];
    let mut result = SolveResult {
        n,
        u,
        residual_interior,
        complementarity_gap,
        iterations: finest.sweeps,
        last_update: finest.last_update,
        levels,
        fb_point: None,
    };
    result.fb_point = crate::analysis::find_free_boundary(&result).ok();
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub residual_interior: f64,
    pub complementarity_gap: f64,
    /// Largest `F_h(u)` on the thin line; nonpositive up to tolerance.
    pub max_thin_operator: f64,
    pub min_thin_value: f64,
    /// Smallest `u(x + h e1) - u(x)` over the interior rows.
    pub min_dx1_difference: f64,
    /// Whether the thin-line values are nondecreasing in `x1` up to `1e-10`.
    pub thin_monotone: bool,
    /// `max |u(x1, x2) - u(x1, -x2)|`.
    pub symmetry_defect: f64,
}

/// Per-region residuals of a solution together with its sign structure.
pub fn residual_report(result: &SolveResult, spec: &ObstacleProblemSpec) -> Result<ResidualReport> {
    let grid = Grid2D::new(result.n)?;
    let d = Discretization::new(&spec.on_grid(grid))?;
    let u = &result.u;
    let n = grid.n();
    let f = d.operator_field(u);
    let (residual_interior, complementarity_gap) = d.residuals(u);
    let thin = grid.thin_row();
    let mut max_thin_operator = f64::NEG_INFINITY;
    let mut min_thin_value = f64::INFINITY;
    for i in 1..n - 1 {
        let idx = grid.index(i, thin);
        max_thin_operator = max_thin_operator.max(f[idx]);
        min_thin_value = min_thin_value.min(u[idx]);
    }
    let mut min_dx1_difference = f64::INFINITY;
    for j in 1..n - 1 {
        for i in 0..n - 1 {
            min_dx1_difference = min_dx1_difference.min(u[grid.index(i + 1, j)] - u[grid.index(i, j)]);
        }
    }
    let thin_monotone = (0..n - 1).all(|i| u[grid.index(i + 1, thin)] - u[grid.index(i, thin)] >= -1e-10);
    let mut symmetry_defect = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            symmetry_defect = symmetry_defect.max((u[grid.index(i, j)] - u[grid.index(i, n - 1 - j)]).abs());
        }
    }
    Ok(ResidualReport {
        residual_interior,
        complementarity_gap,
        max_thin_operator,
        min_thin_value,
        min_dx1_difference,
        thin_monotone,
        symmetry_defect,
    })
}
