use thiserror::Error;

/// Errors produced by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("root not bracketed on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error(
        "eigenvalue map has no zero on the ray (1, -w), 1 <= w <= {omega_max}: not equivalent to a Pucci operator"
    )]
    NotEquivalentToPucci { omega_max: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("angular solution did not return to zero before 2*pi (beta = {beta}, omega = {omega})")]
    NoSectorClosure { beta: f64, omega: f64 },

    #[error("degenerate sector interface: one-sided derivative {0:e} too small to match")]
    DegenerateInterface(f64),

    #[error("solver did not converge after {iterations} sweeps (last update {last_update:e}, residual {residual:e})")]
    NonConvergence { iterations: usize, last_update: f64, residual: f64 },

    #[error("no free boundary on the thin line: {0}")]
    NoFreeBoundary(String),

    #[error("thin-line values are not nondecreasing in x1 (drop of {drop:e} at x1 = {x1})")]
    MonotonicityViolated { x1: f64, drop: f64 },

    #[error("only {found} usable radii, need at least {needed}")]
    InsufficientScales { found: usize, needed: usize },

    #[error("comparison region is empty after flooring the denominator")]
    DegenerateRegion,

    #[error("config parse error at line {line}: {msg}")]
    Config { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
