use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use thinfree::analysis::{
    annulus_region, comparability_check, default_r_max, estimate_exponent_field, free_boundary_of_field,
    run_counterexample, CounterexampleScenario, ExponentOptions,
};
use thinfree::exponents::alpha_table;
use thinfree::fdsolver::{
    residual_report, solve_thin_obstacle, BoundaryData, Grid2D, Method, ObstacleProblemSpec, SolverConfig,
};
use thinfree::operators::parse_operator;
use thinfree::profiles::{build_profile, eval_profile, verify_profile};

use crate::io::{read_field, rows_to_string, write_field, write_rows};
use crate::plot::{emit_svg, Plot};
use crate::report::ReportEnvelope;
use crate::{verify, AlphaArgs, Cli, CliError, Command, CompareArgs, CounterexampleArgs, EstimateArgs, MethodArg};
use crate::{ProfileArgs, SolveArgs};

/// Runs a parsed command line. `argv` excludes the program name.
pub fn run(cli: &Cli, argv: &[String]) -> Result<(), CliError> {
    let start = Instant::now();
    let (results, report) = match &cli.command {
        Command::Alpha(a) => return alpha(cli, a, argv, start),
        Command::Profile(a) => (profile(a)?, a.report.as_deref()),
        Command::Solve(a) => (solve(a)?, a.report.as_deref()),
        Command::Estimate(a) => (estimate(a)?, a.report.as_deref()),
        Command::Counterexample(a) => (counterexample(a)?, a.report.as_deref()),
        Command::Compare(a) => (compare(a)?, a.report.as_deref()),
        Command::Verify(a) => return verify::run(a.suite, cli.seed),
    };
    emit_report(cli, argv, results, start, report)
}

fn config_echo(cli: &Cli) -> Value {
    serde_json::to_value(cli).expect("arguments serialize")
}

fn emit_report(
    cli: &Cli,
    argv: &[String],
    results: Value,
    start: Instant,
    path: Option<&Path>,
) -> Result<(), CliError> {
    let env = ReportEnvelope::new(cli.command.name(), argv, config_echo(cli), results, start.elapsed().as_secs_f64());
    let text = env.to_json();
    match path {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

#[derive(Serialize)]
struct AlphaRow {
    omega: f64,
    alpha: f64,
    homogeneity: f64,
    residual: f64,
    iterations: usize,
}

const ALPHA_HEADER: [&str; 5] = ["omega", "alpha", "homogeneity", "residual", "iterations"];

fn alpha(cli: &Cli, a: &AlphaArgs, argv: &[String], start: Instant) -> Result<(), CliError> {
    let omegas = match (&a.omega, &a.table) {
        (Some(w), None) => vec![*w],
        (None, Some(ws)) => ws.clone(),
        _ => return Err(CliError::Usage("give either --omega or --table".into())),
    };
    let rows: Vec<AlphaRow> = alpha_table(&omegas)?
        .into_iter()
        .map(|r| AlphaRow {
            omega: r.omega,
            alpha: r.alpha,
            homogeneity: r.homogeneity(),
            residual: r.residual,
            iterations: r.iterations,
        })
        .collect();
    if a.json {
        return emit_report(cli, argv, json!({ "rows": to_value(&rows) }), start, None);
    }
    if a.csv || a.table.is_some() {
        print!("{}", rows_to_string(&ALPHA_HEADER, &rows));
    } else {
        println!("{}", rows[0].alpha);
    }
    Ok(())
}

fn profile(a: &ProfileArgs) -> Result<Value, CliError> {
    let p = build_profile(a.omega)?;
    let check = verify_profile(&p, a.tolerance, a.step);
    if let Some(path) = &a.angular_csv {
        write_rows(path, &["theta", "phi", "phi_prime", "sector_index"], &p.angular_table())?;
    }
    if let Some(path) = &a.field_csv {
        let grid = Grid2D::new(a.grid)?;
        let mut u = vec![0.0; grid.len()];
        for j in 0..grid.n() {
            for i in 0..grid.n() {
                u[grid.index(i, j)] = eval_profile(&p, grid.coord(i), grid.coord(j));
            }
        }
        write_field(path, grid, &u)?;
    }
    if let Some(path) = &a.svg {
        let samples = (0..=720)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 720.0;
                (t, p.angular(t).0)
            })
            .collect();
        emit_svg(&Plot::Angular { samples, theta1: p.theta1, theta2: p.theta2, omega: p.omega }, path)?;
    }
    let (l1, r1) = p.interface_derivatives(1);
    let (l2, r2) = p.interface_derivatives(2);
    Ok(json!({
        "omega": p.omega,
        "alpha": p.alpha_g,
        "homogeneity": p.homogeneity(),
        "theta1": p.theta1,
        "theta2": p.theta2,
        "apertures": [p.theta1, p.theta2 - p.theta1, 2.0 * std::f64::consts::PI - p.theta2],
        "c1": p.c1,
        "c3": p.c3,
        "interface_jumps": [r1 - l1, r2 - l2],
        "check": to_value(&check),
    }))
}

fn read_operator(arg: &str) -> Result<String, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{arg}: {e}")))
    } else {
        Ok(arg.to_string())
    }
}

fn solver_config(a: &SolveArgs) -> SolverConfig {
    let method = match a.method {
        MethodArg::Howard => Method::Howard,
        MethodArg::Sor => Method::Sor { relaxation: None },
        MethodArg::PseudoTime => Method::PseudoTime { tau: None },
    };
    SolverConfig {
        method,
        tol: a.tol,
        tol_residual: a.tol_residual,
        tol_complementarity: a.tol_residual,
        max_iterations: a.max_iterations,
        ..SolverConfig::default()
    }
}

fn solve(a: &SolveArgs) -> Result<Value, CliError> {
    let spec_text = read_operator(&a.operator)?;
    let op_spec = parse_operator(&spec_text)?;
    let boundary = if a.bc == "thm17" {
        BoundaryData::Thm17
    } else {
        let (grid, field) = read_field(Path::new(&a.bc))?;
        BoundaryData::sampled(grid, field)?
    };
    let spec = ObstacleProblemSpec::new(a.n, boundary, op_spec.build()?, a.directions)?;
    let result = solve_thin_obstacle(&spec, &solver_config(a))?;
    let rep = residual_report(&result, &spec)?;
    if let Some(path) = &a.out {
        write_field(path, result.grid(), &result.u)?;
    }
    if let Some(path) = &a.svg {
        emit_svg(&Plot::Field { n: result.n, u: result.u.clone(), z: result.fb_point }, path)?;
    }
    Ok(json!({
        "operator": op_spec.to_string(),
        "boundary": spec.boundary.label(),
        "n": result.n,
        "residual_interior": result.residual_interior,
        "complementarity_gap": result.complementarity_gap,
        "iterations": result.iterations,
        "levels": to_value(&result.levels),
        "fb_point": result.fb_point,
        "report": to_value(&rep),
    }))
}

fn estimate(a: &EstimateArgs) -> Result<Value, CliError> {
    let (grid, u) = read_field(&a.input)?;
    let z = if a.z == "auto" {
        free_boundary_of_field(grid, &u)?
    } else {
        a.z.parse::<f64>().map_err(|_| CliError::Usage(format!("--z must be `auto` or a number, got {}", a.z)))?
    };
    let r_max = a.r_max.unwrap_or_else(|| default_r_max(z));
    let r_min = a.r_min.unwrap_or(4.0 * grid.h());
    let fit = estimate_exponent_field(
        grid,
        &u,
        z,
        r_max,
        r_min,
        ExponentOptions { radii_per_octave: a.radii_per_octave, subtract_plane: a.subtract_plane },
    )?;
    let rows: Vec<(f64, f64)> = fit.radii.iter().cloned().zip(fit.sup_values.iter().cloned()).collect();
    if let Some(path) = &a.csv {
        write_rows(path, &["r", "sup"], &rows)?;
    }
    if let Some(path) = &a.svg {
        let line = thinfree::analysis::least_squares(
            &rows.iter().filter(|p| p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect::<Vec<_>>(),
        );
        emit_svg(
            &Plot::LogLog {
                points: rows.clone(),
                slope: line.slope,
                intercept: line.intercept,
                local_slopes: fit.local_slopes.clone(),
            },
            path,
        )?;
    }
    Ok(json!({ "alpha": fit.global_slope - 1.0, "fit": to_value(&fit) }))
}

fn counterexample(a: &CounterexampleArgs) -> Result<Value, CliError> {
    let mut scenario = CounterexampleScenario::two_term(a.lambda1, a.offset, a.n);
    scenario.directions = a.directions;
    scenario.radii_per_octave = a.radii_per_octave;
    let rep = run_counterexample(&scenario)?;
    if let Some(path) = &a.svg {
        let points: Vec<(f64, f64)> = rep.fit.radii.iter().cloned().zip(rep.fit.sup_values.iter().cloned()).collect();
        let line = thinfree::analysis::least_squares(&points.iter().map(|p| (p.0.ln(), p.1.ln())).collect::<Vec<_>>());
        emit_svg(
            &Plot::LogLog {
                points,
                slope: line.slope,
                intercept: line.intercept,
                local_slopes: rep.fit.local_slopes.clone(),
            },
            path,
        )?;
    }
    Ok(json!({ "scenario": to_value(&scenario), "report": to_value(&rep) }))
}

fn compare(a: &CompareArgs) -> Result<Value, CliError> {
    let (ga, fa) = read_field(&a.a)?;
    let (gb, fb) = read_field(&a.b)?;
    if ga != gb {
        return Err(CliError::Usage(format!("grids differ: n = {} vs {}", ga.n(), gb.n())));
    }
    let region: Vec<usize> = match a.z {
        Some(z) => annulus_region(ga, z, a.r_in, a.r_out, a.strip),
        None => (1..ga.n() - 1)
            .flat_map(|j| (1..ga.n() - 1).map(move |i| (i, j)))
            .filter(|&(_, j)| ga.coord(j).abs() >= a.strip)
            .map(|(i, j)| ga.index(i, j))
            .collect(),
    };
    let (lo, hi) = comparability_check(&fa, &fb, &region)?;
    Ok(json!({ "min_ratio": lo, "max_ratio": hi, "region_nodes": region.len() }))
}
