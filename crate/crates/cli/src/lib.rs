//! Command-line front end: argument grammar, subcommands, CSV/JSON output and
//! SVG figures.

pub mod commands;
pub mod io;
pub mod plot;
pub mod report;
pub mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use plot::{emit_svg, render_svg, Plot};
pub use report::ReportEnvelope;

/// Exit code for numerical failures.
pub const EXIT_NUMERICAL: u8 = 1;
/// Exit code for usage errors.
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(thinfree::Error),
    Io(String),
    /// Checks ran and some failed.
    Failed(usize),
}

impl From<thinfree::Error> for CliError {
    fn from(e: thinfree::Error) -> Self {
        match e {
            thinfree::Error::Parameter(m) => CliError::Usage(m),
            e @ thinfree::Error::Config { .. } => CliError::Usage(e.to_string()),
            e => CliError::Numerical(e),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Failed(k) => write!(f, "{k} check(s) failed"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_NUMERICAL,
        }
    }
}

#[derive(Debug, Clone, Parser, Serialize)]
#[command(
    name = "thinfree",
    version,
    about = "Exponents, blow-up profiles and finite-difference solves for the 2D fully nonlinear thin obstacle problem"
)]
pub struct Cli {
    /// Worker threads for data-parallel loops.
    #[arg(long, global = true, env = "THINFREE_THREADS", default_value_t = 1)]
    pub threads: usize,
    /// Seed for sampling-based checks.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Homogeneity exponent alpha(omega) of Pucci operators.
    Alpha(AlphaArgs),
    /// Three-sector homogeneous blow-up profile.
    Profile(ProfileArgs),
    /// Finite-difference solve of the thin obstacle problem on [-1, 1]^2.
    Solve(SolveArgs),
    /// Growth exponent at the free boundary point of a field.
    Estimate(EstimateArgs),
    /// Scale-dependent growth for max(trace, P+ - c).
    Counterexample(CounterexampleArgs),
    /// Extremal ratios of two fields over a region.
    Compare(CompareArgs),
    /// Runs invariant checks of every module.
    Verify(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Alpha(_) => "alpha",
            Command::Profile(_) => "profile",
            Command::Solve(_) => "solve",
            Command::Estimate(_) => "estimate",
            Command::Counterexample(_) => "counterexample",
            Command::Compare(_) => "compare",
            Command::Verify(_) => "verify",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AlphaArgs {
    /// Ellipticity ratio; `inf` gives the limit exponent.
    #[arg(long, conflicts_with = "table", required_unless_present = "table", allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Comma-separated increasing ratios.
    #[arg(long, value_delimiter = ',')]
    pub table: Option<Vec<f64>>,
    /// Print the full report as JSON.
    #[arg(long, conflicts_with = "csv")]
    pub json: bool,
    /// Print CSV with columns omega, alpha, homogeneity, residual, iterations.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProfileArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub omega: f64,
    /// Angular table: theta, phi, phi_prime, sector_index.
    #[arg(long)]
    pub angular_csv: Option<PathBuf>,
    /// Profile sampled on a grid: x1, x2, u.
    #[arg(long)]
    pub field_csv: Option<PathBuf>,
    /// Grid size for --field-csv.
    #[arg(long, default_value_t = 129)]
    pub grid: usize,
    /// Angular plot.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Relative residual tolerance of the self-check.
    #[arg(long, default_value_t = 1e-3)]
    pub tolerance: f64,
    /// Finite-difference step of the self-check.
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Howard,
    Sor,
    PseudoTime,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolveArgs {
    /// Operator config file, or the config text itself.
    #[arg(long)]
    pub operator: String,
    /// `thm17`, or a field CSV whose boundary values are used.
    #[arg(long, default_value = "thm17")]
    pub bc: String,
    #[arg(long, default_value_t = 257)]
    pub n: usize,
    #[arg(long, default_value_t = 16)]
    pub directions: usize,
    /// Update tolerance, relative to h^2.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Residual and complementarity tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol_residual: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Howard)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 200_000)]
    pub max_iterations: usize,
    /// Field CSV: x1, x2, u.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Heatmap of the solution.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EstimateArgs {
    /// Field CSV: x1, x2, u.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Free boundary abscissa, or `auto`.
    #[arg(long, default_value = "auto", allow_hyphen_values = true)]
    pub z: String,
    /// Largest radius; defaults to min(0.4, half the distance to the boundary).
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Smallest radius; defaults to 4h.
    #[arg(long)]
    pub r_min: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub radii_per_octave: usize,
    #[arg(long)]
    pub subtract_plane: bool,
    /// Table: r, sup.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Log-log plot.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CounterexampleArgs {
    #[arg(long = "Lambda1", default_value_t = 1.5)]
    pub lambda1: f64,
    /// Offset c in max(trace, P+_{1,Lambda1} - c).
    #[arg(long)]
    pub offset: f64,
    #[arg(long, default_value_t = 513)]
    pub n: usize,
    #[arg(long, default_value_t = 16)]
    pub directions: usize,
    #[arg(long, default_value_t = 4)]
    pub radii_per_octave: usize,
    /// Log-log plot.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompareArgs {
    /// Numerator field CSV.
    #[arg(long)]
    pub a: PathBuf,
    /// Denominator field CSV on the same grid.
    #[arg(long)]
    pub b: PathBuf,
    /// Center of an annular region on the thin line; whole interior if absent.
    #[arg(long, allow_negative_numbers = true)]
    pub z: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub r_in: f64,
    #[arg(long, default_value_t = 0.25)]
    pub r_out: f64,
    /// Minimum distance from the thin line.
    #[arg(long, default_value_t = 0.0)]
    pub strip: f64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Quick,
    Full,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::Quick)]
    pub suite: Suite,
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code. Diagnostics go to standard error.
pub fn main_with_args(argv: &[String]) -> u8 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if cli.threads == 0 {
        eprintln!("usage error: --threads must be positive");
        return EXIT_USAGE;
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return EXIT_NUMERICAL;
        }
    };
    let rest = &argv[1.min(argv.len())..];
    match pool.install(|| commands::run(&cli, rest)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("thinfree {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}
