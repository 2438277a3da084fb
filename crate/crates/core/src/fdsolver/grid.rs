use std::fmt;
use std::sync::Arc;

use crate::error::{param, Result};

/// Uniform grid on `[-1, 1]^2` with `n` (odd) nodes per side, stored row-major
/// with index `j * n + i` for the node `(x_i, x_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid2D {
    n: usize,
}

impl Grid2D {
    pub fn new(n: usize) -> Result<Self> {
        if n < 5 || n % 2 == 0 {
            return param(format!("grid size must be odd and at least 5, got {n}"));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        2.0 / (self.n - 1) as f64
    }

    /// Row of the thin line `{x2 = 0}`.
    pub fn thin_row(&self) -> usize {
        (self.n - 1) / 2
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of node index `i` along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        let half = self.thin_row() as f64;
        (i as f64 - half) / half
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.n - 1 || j == self.n - 1
    }

    /// Nodes `(i, j)` within distance `|x - z| <= r` of a point.
    pub fn nodes_within(&self, z: (f64, f64), r: f64) -> impl Iterator<Item = (usize, usize)> + '_ {
        let h = self.h();
        let lo = |c: f64| (((c - r + 1.0) / h).floor().max(0.0)) as usize;
        let hi = |c: f64| ((((c + r + 1.0) / h).ceil()) as usize).min(self.n - 1);
        let (i0, i1, j0, j1) = (lo(z.0), hi(z.0), lo(z.1), hi(z.1));
        (j0..=j1)
            .flat_map(move |j| (i0..=i1).map(move |i| (i, j)))
            .filter(move |&(i, j)| (self.coord(i) - z.0).hypot(self.coord(j) - z.1) <= r * (1.0 + 1e-12))
    }

    /// Bilinear interpolation of a grid field at a point of the square.
    pub fn interpolate(&self, u: &[f64], x1: f64, x2: f64) -> f64 {
        let h = self.h();
        let top = (self.n - 2) as f64;
        let s = ((x1 + 1.0) / h).clamp(0.0, self.n as f64 - 1.0);
        let t = ((x2 + 1.0) / h).clamp(0.0, self.n as f64 - 1.0);
        let i = s.floor().min(top);
        let j = t.floor().min(top);
        let (a, b) = (s - i, t - j);
        let (i, j) = (i as usize, j as usize);
        let v = |di: usize, dj: usize| u[self.index(i + di, j + dj)];
        (1.0 - a) * (1.0 - b) * v(0, 0) + a * (1.0 - b) * v(1, 0) + (1.0 - a) * b * v(0, 1) + a * b * v(1, 1)
    }
}

/// Dirichlet data on the boundary of `[-1, 1]^2`.
#[derive(Clone)]
pub enum BoundaryData {
    /// `+1` on `{x1 = 1}`, `-1` on `{x1 = -1}` and on `{x2 = +-1}`.
    Thm17,
    Constant(f64),
    Function(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
    /// Boundary values taken from a full field on a grid of size `n`,
    /// interpolated linearly along each edge.
    Sampled {
        n: usize,
        field: Arc<Vec<f64>>,
    },
}

impl fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryData::Thm17 => write!(f, "Thm17"),
            BoundaryData::Constant(c) => write!(f, "Constant({c})"),
            BoundaryData::Function(_) => write!(f, "Function(..)"),
            BoundaryData::Sampled { n, .. } => write!(f, "Sampled {{ n: {n} }}"),
        }
    }
}

impl BoundaryData {
    pub fn function<F>(f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        BoundaryData::Function(Arc::new(f))
    }

    pub fn sampled(grid: Grid2D, field: Vec<f64>) -> Result<Self> {
        if field.len() != grid.len() {
            return param(format!("sampled boundary needs {} values, got {}", grid.len(), field.len()));
        }
        if field.iter().any(|v| !v.is_finite()) {
            return param("sampled boundary values must be finite");
        }
        Ok(BoundaryData::Sampled { n: grid.n(), field: Arc::new(field) })
    }

    pub fn label(&self) -> &'static str {
        match self {
            BoundaryData::Thm17 => "thm17",
            BoundaryData::Constant(_) => "constant",
            BoundaryData::Function(_) => "function",
            BoundaryData::Sampled { .. } => "file",
        }
    }

    /// Value at a boundary point.
    pub fn value(&self, x1: f64, x2: f64) -> f64 {
        match self {
            BoundaryData::Thm17 => {
                if x2.abs() >= 1.0 {
                    -1.0
                } else if x1 >= 1.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            BoundaryData::Constant(c) => *c,
            BoundaryData::Function(f) => f(x1, x2),
            BoundaryData::Sampled { n, field } => {
                let n = *n;
                let half = (n - 1) as f64 / 2.0;
                let at = |i: usize, j: usize| field[j * n + i];
                let pos = |c: f64| ((c + 1.0) * half).clamp(0.0, (n - 1) as f64);
                let lerp = |t: f64, get: &dyn Fn(usize) -> f64| {
                    let k = (t.floor() as usize).min(n - 2);
                    let w = t - k as f64;
                    (1.0 - w) * get(k) + w * get(k + 1)
                };
                if x2 <= -1.0 || x2 >= 1.0 {
                    let j = if x2 <= -1.0 { 0 } else { n - 1 };
                    lerp(pos(x1), &|k| at(k, j))
                } else {
                    let i = if x1 <= 0.0 { 0 } else { n - 1 };
                    lerp(pos(x2), &|k| at(i, k))
                }
            }
        }
    }

    /// Field with the boundary values written in and zero elsewhere.
    pub fn fill(&self, grid: Grid2D) -> Vec<f64> {
        let n = grid.n();
        let mut u = vec![0.0; grid.len()];
        for j in 0..n {
            for i in 0..n {
                if grid.is_boundary(i, j) {
                    u[grid.index(i, j)] = self.value(grid.coord(i), grid.coord(j));
                }
            }
        }
        u
    }
}
