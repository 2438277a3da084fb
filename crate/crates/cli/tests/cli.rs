use std::path::Path;
use std::process::{Command, Output};

use thinfree_cli::{render_svg, Plot, ReportEnvelope};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thinfree")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn alpha_prints_one_half() {
    let o = run(&["alpha", "--omega", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), 0.5);
}

#[test]
fn alpha_table_is_csv() {
    let o = run(&["alpha", "--table", "1,2,inf"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("omega,alpha,homogeneity,residual,iterations"));
    let last: Vec<&str> = text.lines().last().unwrap().split(',').collect();
    assert!((last[1].parse::<f64>().unwrap() - 0.64306995).abs() < 5e-9);
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["alpha", "--omega", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["alpha"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--operator", "pucci { lam = 1 "]).status.code(), Some(2));
    assert_eq!(run(&["--threads", "0", "alpha", "--omega", "2"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn numerical_failures_exit_with_one() {
    let o = run(&["solve", "--operator", "laplacian {}", "--n", "33", "--max-iterations", "1"]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn report_round_trips_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let field = dir.path().join("u.csv");
    let args = [
        "solve",
        "--operator",
        "pucci { lam = 1, Lam = 2 }",
        "--n",
        "33",
        "--out",
        field.to_str().unwrap(),
        "--report",
        first.to_str().unwrap(),
    ];
    assert_eq!(run(&args).status.code(), Some(0));
    let env = ReportEnvelope::from_json(&read(&first)).unwrap();
    assert_eq!(env.schema, "thinfree-report/1");
    assert_eq!(env.command, "solve");
    assert_eq!(ReportEnvelope::from_json(&env.to_json()).unwrap(), env);
    let field_text = read(&field);

    // Replaying the recorded argv gives identical results and field.
    let replay: Vec<&str> = env.argv.iter().map(String::as_str).collect();
    assert_eq!(run(&replay).status.code(), Some(0));
    let again = ReportEnvelope::from_json(&read(&first)).unwrap();
    assert_eq!(again.results, env.results);
    assert_eq!(read(&field), field_text);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut fields = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("u{threads}.csv"));
        let o = run(&[
            "--threads",
            threads,
            "solve",
            "--operator",
            "laplacian {}",
            "--n",
            "33",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        fields.push(read(&out));
    }
    assert_eq!(fields[0], fields[1]);
}

#[test]
fn estimate_reads_a_profile_field() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("p.csv");
    let table = dir.path().join("r.csv");
    let plot = dir.path().join("fit.svg");
    let o = run(&["profile", "--omega", "2", "--field-csv", field.to_str().unwrap(), "--grid", "129"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&[
        "estimate",
        "--in",
        field.to_str().unwrap(),
        "--z",
        "0",
        "--radii-per-octave",
        "4",
        "--csv",
        table.to_str().unwrap(),
        "--svg",
        plot.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let env = ReportEnvelope::from_json(&stdout(&o)).unwrap();
    let alpha = env.results["alpha"].as_f64().unwrap();
    assert!((alpha - 0.5607).abs() < 0.02, "{alpha}");
    assert!(read(&table).starts_with("r,sup\n"));
    assert!(read(&plot).contains("<svg"));
}

#[test]
fn compare_of_a_field_with_itself_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("p.csv");
    run(&["profile", "--omega", "1", "--field-csv", field.to_str().unwrap(), "--grid", "33"]);
    let f = field.to_str().unwrap();
    let o = run(&["compare", "--a", f, "--b", f, "--z", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let env = ReportEnvelope::from_json(&stdout(&o)).unwrap();
    assert_eq!(env.results["min_ratio"].as_f64(), Some(1.0));
    assert_eq!(env.results["max_ratio"].as_f64(), Some(1.0));
}

#[test]
fn malformed_field_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("bad.csv");
    std::fs::write(&field, "x1,x2,u\n0,0,1\n0,1,2\n").unwrap();
    let o = run(&["estimate", "--in", field.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn quick_verify_passes() {
    let o = run(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn svg_figures_are_well_formed() {
    let plots = [
        Plot::Angular {
            samples: (0..50).map(|k| (k as f64 * 0.1, (k as f64 * 0.1).sin())).collect(),
            theta1: 2.0,
            theta2: 4.0,
            omega: 1.0,
        },
        Plot::Field { n: 17, u: (0..289).map(|k| k as f64 / 289.0 - 0.5).collect(), z: Some(0.1) },
        Plot::LogLog {
            points: vec![(0.1, 0.03), (0.2, 0.09), (0.4, 0.25)],
            slope: 1.5,
            intercept: 0.0,
            local_slopes: vec![(0.15, 1.5), (0.3, 1.5)],
        },
    ];
    for p in &plots {
        let svg = render_svg(p);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"), "{svg}");
        assert!(svg.contains("width=\"640\""));
        assert!(!svg.contains("NaN"));
    }
}
