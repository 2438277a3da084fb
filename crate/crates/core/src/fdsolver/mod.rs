//! Monotone wide-stencil solver for the thin obstacle problem on `[-1, 1]^2`:
//!
//! ```text
//! F(D^2 u) <= 0,  u >= 0 on {x2 = 0},  F(D^2 u) = 0 away from {x2 = 0, u = 0},
//! ```
//!
//! with Dirichlet data on the boundary of the square.

mod grid;
pub mod linear;
mod solve;
mod stencil;

pub use grid::{BoundaryData, Grid2D};
pub use solve::{
    residual_report, solve_thin_obstacle, Discretization, Method, ObstacleProblemSpec, ResidualReport, SolveResult,
    SolverConfig,
};
pub use stencil::{build_stencil, Branch, GridStencil, Piece, Source, StencilOperator, SUPPORTED_DIRECTIONS};
