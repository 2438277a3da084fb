//! Numerics for the fully nonlinear thin obstacle problem in two dimensions.
//!
//! - [`operators`]: convex uniformly elliptic operators on 2x2 symmetric
//!   matrices, their recession functions and moduli of continuity.
//! - [`exponents`]: the special functions `g`, `h` and the regular-point
//!   exponent `alpha(omega)` of the maximal Pucci operator.
//! - [`profiles`]: homogeneous three-sector blow-up profiles by angular shooting.
//! - [`fdsolver`]: a monotone wide-stencil solver for the thin obstacle problem
//!   on `[-1, 1]^2`.
//! - [`analysis`]: free boundary detection, growth exponent fits and the
//!   non-homogeneous counterexample experiment.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::manual_is_multiple_of, clippy::needless_range_loop)]

pub mod analysis;
pub mod error;
pub mod exponents;
pub mod fdsolver;
pub mod operators;
pub mod profiles;
pub mod roots;

pub use error::{Error, Result};
