use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::grid::{BoundaryData, Grid2D};
use crate::error::{param, Result};
use crate::operators::{ConvexOperator, OperatorKind, Term};

/// Direction counts accepted by [`build_stencil`].
pub const SUPPORTED_DIRECTIONS: [usize; 4] = [4, 8, 16, 32];

/// Lattice directions with angles in `[0, pi/2)`; the second member of each
/// frame is the rotation by `pi/2`.
fn quadrant(k: usize) -> Option<&'static [[i32; 2]]> {
    const K4: [[i32; 2]; 2] = [[1, 0], [1, 1]];
    const K8: [[i32; 2]; 4] = [[1, 0], [2, 1], [1, 1], [1, 2]];
    const K16: [[i32; 2]; 8] = [[1, 0], [4, 1], [2, 1], [4, 3], [1, 1], [3, 4], [1, 2], [1, 4]];
    const K32: [[i32; 2]; 16] = [
        [1, 0],
        [5, 1],
        [4, 1],
        [3, 1],
        [5, 2],
        [2, 1],
        [3, 2],
        [4, 3],
        [1, 1],
        [3, 4],
        [2, 3],
        [1, 2],
        [2, 5],
        [1, 3],
        [1, 4],
        [1, 5],
    ];
    match k {
        4 => Some(&K4),
        8 => Some(&K8),
        16 => Some(&K16),
        32 => Some(&K32),
        _ => None,
    }
}

/// One monotone piece of the discrete operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Piece {
    /// `mu[0] D_a + mu[1] D_b + offset` along lattice frame `frame`.
    Linear { frame: usize, mu: [f64; 2], offset: f64 },
    /// `max over frames of P+ restricted to the frame, plus offset`.
    Pucci { lambda: f64, big_lambda: f64, offset: f64 },
}

/// One linear branch `x D_a + y D_b + offset` with `x, y > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub a: usize,
    pub b: usize,
    pub x: f64,
    pub y: f64,
    pub offset: f64,
}

impl Branch {
    #[inline]
    fn value(&self, sk: &[(f64, f64)], u0: f64, h2: f64) -> f64 {
        let (a, b) = (sk[self.a], sk[self.b]);
        (self.x * (a.0 - a.1 * u0) + self.y * (b.0 - b.1 * u0)) / h2 + self.offset
    }

    #[inline]
    fn root(&self, sk: &[(f64, f64)], h2: f64) -> f64 {
        let (a, b) = (sk[self.a], sk[self.b]);
        (self.x * a.0 + self.y * b.0 + self.offset * h2) / (self.x * a.1 + self.y * b.1)
    }

    #[inline]
    fn diagonal(&self, sk: &[(f64, f64)]) -> f64 {
        self.x * sk[self.a].1 + self.y * sk[self.b].1
    }
}

/// Wide-stencil discretization of a convex operator: a maximum of monotone
/// pieces built from directional second differences along lattice frames.
///
/// Each piece expands into linear branches (a Pucci piece contributes one
/// branch per frame and per choice of `lambda`/`Lambda` on each direction), so
/// `F_h` is a maximum of monotone linear operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StencilOperator {
    directions: Vec<[i32; 2]>,
    pieces: Vec<Piece>,
    branches: Vec<Branch>,
    kind: OperatorKind,
    max_angle_gap: f64,
}

fn angle(d: [i32; 2]) -> f64 {
    (d[1] as f64).atan2(d[0] as f64)
}

/// Builds the `K`-direction stencil for `op`.
pub fn build_stencil(op: &ConvexOperator, k: usize) -> Result<StencilOperator> {
    let Some(quad) = quadrant(k) else {
        return param(format!("unsupported direction count {k}, expected one of {SUPPORTED_DIRECTIONS:?}"));
    };
    let mut directions: Vec<[i32; 2]> = quad.to_vec();
    directions.extend(quad.iter().map(|d| [-d[1], d[0]]));

    let mut angles: Vec<f64> = directions.iter().map(|&d| angle(d).rem_euclid(PI)).collect();
    angles.sort_by(f64::total_cmp);
    let wrap = angles[0] + PI - angles[angles.len() - 1];
    let max_angle_gap = angles.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max);

    let pieces = match op.kind() {
        OperatorKind::PucciPlus(ell) => {
            vec![Piece::Pucci { lambda: ell.lambda, big_lambda: ell.big_lambda, offset: 0.0 }]
        }
        _ => op
            .terms()
            .iter()
            .map(|t| match *t {
                Term::Pucci { ell, offset } => Piece::Pucci { lambda: ell.lambda, big_lambda: ell.big_lambda, offset },
                Term::Linear(lin) => {
                    let (mu1, mu2) = lin.coeff.eigenvalues();
                    if mu1 == mu2 {
                        return Piece::Linear { frame: 0, mu: [mu1, mu1], offset: lin.offset };
                    }
                    // Frame closest to the eigenframe; `top` is the direction of mu2.
                    let top = lin.coeff.principal_angle();
                    let (frame, dist) = quad
                        .iter()
                        .enumerate()
                        .map(|(f, &d)| {
                            let diff = (angle(d) - top).rem_euclid(PI);
                            (f, diff.min(PI - diff))
                        })
                        .min_by(|a, b| {
                            let da = a.1.min((a.1 - PI / 2.0).abs());
                            let db = b.1.min((b.1 - PI / 2.0).abs());
                            da.total_cmp(&db)
                        })
                        .expect("direction set is non-empty");
                    let mu = if dist < PI / 4.0 { [mu2, mu1] } else { [mu1, mu2] };
                    Piece::Linear { frame, mu, offset: lin.offset }
                }
            })
            .collect(),
    };
    let m = directions.len() / 2;
    let mut branches = Vec::new();
    for p in &pieces {
        match *p {
            Piece::Linear { frame, mu, offset } => {
                branches.push(Branch { a: frame, b: frame + m, x: mu[0], y: mu[1], offset })
            }
            Piece::Pucci { lambda, big_lambda, offset } => {
                for f in 0..m {
                    for (x, y) in
                        [(lambda, lambda), (lambda, big_lambda), (big_lambda, lambda), (big_lambda, big_lambda)]
                    {
                        branches.push(Branch { a: f, b: f + m, x, y, offset });
                    }
                }
            }
        }
    }
    Ok(StencilOperator { directions, pieces, branches, kind: op.kind(), max_angle_gap })
}

impl StencilOperator {
    pub fn directions(&self) -> &[[i32; 2]] {
        &self.directions
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn frames(&self) -> usize {
        self.directions.len() / 2
    }

    /// Largest angle between neighbouring directions (modulo `pi`).
    pub fn max_angle_gap(&self) -> f64 {
        self.max_angle_gap
    }

    pub fn max_offset(&self) -> usize {
        self.directions.iter().map(|d| d[0].unsigned_abs().max(d[1].unsigned_abs()) as usize).max().unwrap_or(1)
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// `F_h` at a node whose directional second differences are
    /// `(s_d - k_d u0) / h^2`.
    pub fn apply(&self, sk: &[(f64, f64)], u0: f64, h2: f64) -> f64 {
        self.branches.iter().map(|b| b.value(sk, u0, h2)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the branch attaining the maximum in [`Self::apply`].
    pub fn active_branch(&self, sk: &[(f64, f64)], u0: f64, h2: f64) -> usize {
        let mut best = (0, f64::NEG_INFINITY);
        for (k, b) in self.branches.iter().enumerate() {
            let v = b.value(sk, u0, h2);
            if v > best.1 {
                best = (k, v);
            }
        }
        best.0
    }

    /// The value `u0` solving `F_h = 0` at a node; `F_h` is decreasing in
    /// `u0`, so this is the largest root over all branches.
    pub fn solve_point(&self, sk: &[(f64, f64)], h2: f64) -> f64 {
        self.branches.iter().map(|b| b.root(sk, h2)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Value of a single branch.
    pub fn branch_value(&self, branch: usize, sk: &[(f64, f64)], u0: f64, h2: f64) -> f64 {
        self.branches[branch].value(sk, u0, h2)
    }

    /// Root of a single branch.
    pub fn solve_branch(&self, branch: usize, sk: &[(f64, f64)], h2: f64) -> f64 {
        self.branches[branch].root(sk, h2)
    }

    /// Largest diagonal coefficient over all branches, in units of `1/h^2`.
    pub fn diagonal_bound(&self, sk: &[(f64, f64)]) -> f64 {
        self.branches.iter().map(|b| b.diagonal(sk)).fold(0.0, f64::max)
    }
}

/// Where one arm of a directional difference reads its value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source {
    Node(usize),
    Value(f64),
}

#[derive(Debug, Clone, Copy)]
struct Arm {
    weight: f64,
    source: Source,
}

const FAR: u32 = u32::MAX;

/// A stencil compiled against a grid and boundary data: arms that leave the
/// square are shortened to the boundary and read the boundary data there.
#[derive(Debug, Clone)]
pub struct GridStencil {
    pub(crate) stencil: StencilOperator,
    grid: Grid2D,
    offsets: Vec<isize>,
    inv_norm2: Vec<f64>,
    near: Vec<u32>,
    arms: Vec<[Arm; 2]>,
}

impl GridStencil {
    pub fn new(stencil: StencilOperator, grid: Grid2D, boundary: &BoundaryData) -> Self {
        let n = grid.n();
        let band = stencil.max_offset();
        let nd = stencil.directions.len();
        let offsets = stencil.directions.iter().map(|d| d[1] as isize * n as isize + d[0] as isize).collect();
        let inv_norm2: Vec<f64> = stencil.directions.iter().map(|d| 1.0 / (d[0] * d[0] + d[1] * d[1]) as f64).collect();
        let mut near = vec![FAR; grid.len()];
        let mut arms = Vec::new();
        let h = grid.h();
        let last = (n - 1) as i64;
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                if i >= band && j >= band && i + band < n && j + band < n {
                    continue;
                }
                near[grid.index(i, j)] = (arms.len() / nd) as u32;
                for (k, d) in stencil.directions.iter().enumerate() {
                    let arm = |sgn: i64| -> (f64, Source) {
                        let (p, q) = (sgn * d[0] as i64, sgn * d[1] as i64);
                        let (ti, tj) = (i as i64 + p, j as i64 + q);
                        if (0..=last).contains(&ti) && (0..=last).contains(&tj) {
                            return (1.0, Source::Node(grid.index(ti as usize, tj as usize)));
                        }
                        let frac = |pos: i64, step: i64| -> f64 {
                            if pos + step > last {
                                (last - pos) as f64 / step as f64
                            } else if pos + step < 0 {
                                pos as f64 / (-step) as f64
                            } else {
                                1.0
                            }
                        };
                        let t = frac(i as i64, p).min(frac(j as i64, q));
                        let mut x1 = grid.coord(i) + t * p as f64 * h;
                        let mut x2 = grid.coord(j) + t * q as f64 * h;
                        // Snap to the edge that was hit.
                        for c in [&mut x1, &mut x2] {
                            if (c.abs() - 1.0).abs() < 1e-12 {
                                *c = c.signum();
                            }
                        }
                        (t, Source::Value(boundary.value(x1, x2)))
                    };
                    let (tp, sp) = arm(1);
                    let (tm, sm) = arm(-1);
                    let scale = 2.0 * inv_norm2[k] / (tp + tm);
                    arms.push([Arm { weight: scale / tp, source: sp }, Arm { weight: scale / tm, source: sm }]);
                }
            }
        }
        Self { stencil, grid, offsets, inv_norm2, near, arms }
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn stencil(&self) -> &StencilOperator {
        &self.stencil
    }

    pub fn direction_count(&self) -> usize {
        self.offsets.len()
    }

    /// The two arms `(weight, source)` of direction `d` at interior node `idx`;
    /// `s_d` is the weighted sum of the sources and `k_d` the sum of weights.
    pub fn arms(&self, idx: usize, d: usize) -> [(f64, Source); 2] {
        let slot = self.near[idx];
        if slot == FAR {
            let off = self.offsets[d];
            let w = self.inv_norm2[d];
            [(w, Source::Node((idx as isize + off) as usize)), (w, Source::Node((idx as isize - off) as usize))]
        } else {
            let [a, b] = self.arms[slot as usize * self.offsets.len() + d];
            [(a.weight, a.source), (b.weight, b.source)]
        }
    }

    /// Per-direction `(s_d, k_d)` at interior node `idx`, so that the unit
    /// directional second difference is `(s_d - k_d u[idx]) / h^2`.
    #[inline]
    pub fn gather(&self, u: &[f64], idx: usize, out: &mut [(f64, f64)]) {
        let slot = self.near[idx];
        if slot == FAR {
            for (k, o) in out.iter_mut().enumerate() {
                let off = self.offsets[k];
                let w = self.inv_norm2[k];
                let plus = u[(idx as isize + off) as usize];
                let minus = u[(idx as isize - off) as usize];
                *o = (w * (plus + minus), 2.0 * w);
            }
        } else {
            let base = slot as usize * out.len();
            let read = |a: &Arm| match a.source {
                Source::Node(m) => u[m],
                Source::Value(v) => v,
            };
            for (k, o) in out.iter_mut().enumerate() {
                let [a, b] = &self.arms[base + k];
                *o = (a.weight * read(a) + b.weight * read(b), a.weight + b.weight);
            }
        }
    }
}
