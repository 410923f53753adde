use std::path::Path;
use std::process::{Command, Output};

use orthostab::model::{MapBase, MapModel, Noise};
use orthostab::report::{read_report, write_report, write_trace_csv, ReportFormat, TRACE_COLUMNS};
use orthostab::{run_experiment, ExperimentConfig, Rational};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orthostab")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn report_round_trips_through_json() {
    let cfg = ExperimentConfig::additive(
        Rational::new(3, 2),
        0.5,
        MapModel::new(MapBase::Zero { dim: 2 }, Noise { seed: 5, amplitude: 0.1 }),
    );
    let report = run_experiment(&cfg);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    write_report(&report, &path, ReportFormat::Json).unwrap();
    assert_eq!(read_report(&path).unwrap(), report);
}

#[test]
fn empty_trace_is_header_only() {
    let mut buf = Vec::new();
    write_trace_csv(None, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", TRACE_COLUMNS.join(",")));
}

#[test]
fn solve_then_report_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"problem": "quadratic", "lambda": 2, "beta": 0.5, "box_radius": 2,
            "map": {"base": {"kind": "quadratic", "q": [[1, 0], [0, 1]]}, "noise": {"seed": 3, "amplitude": 0.05}}}"#,
    );
    let report = dir.path().join("report.json");
    let out = bin(&["solve", "--config", &config, "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let parsed = read_report(&report).unwrap();
    assert!(parsed.pass.all);

    let out = bin(&["report", "--in", report.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,A_num,A_den,B_num,B_den,step_norm,h_value"));
    assert!(lines.next().unwrap().starts_with("0,1,1,0,1,"));
    let last = text.lines().last().unwrap();
    let cells: Vec<&str> = last.split(',').collect();
    assert_eq!(cells[5], "");
    let h: f64 = cells[6].parse().unwrap();
    assert_eq!(h, parsed.distances.unwrap().max_fg_distance_on_image_set);
}

#[test]
fn solve_reports_parameter_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"problem": "additive", "M": "1/2", "beta": 1, "map": {"base": {"kind": "zero"}}}"#,
    );
    let out = bin(&["solve", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[invalid-M]"));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"]["failure"]["code"], "invalid-M");
}

#[test]
fn unreadable_config_is_an_error() {
    let out = bin(&["solve", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error["));
}

#[test]
fn check_space_flags_broken_beta() {
    let ok = bin(&["check-space", "--kind", "power-euclidean", "--beta", "0.5", "--samples", "2000"]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = bin(&["check-space", "--kind", "power-euclidean", "--beta", "2", "--samples", "2000"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("FAIL"));
}

#[test]
fn check_ortho_suites() {
    let ok = bin(&["check-ortho", "--relation", "inner-product", "--axioms", "fs", "--samples", "300"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    let bad = bin(&["check-ortho", "--relation", "diagonal", "--axioms", "fs", "--samples", "300"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn coeffs_table() {
    let out = bin(&["coeffs", "--alpha", "3/8", "--gamma", "1/8", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[1], "0\t1\t0\t1\t0\ttrue");
    assert_eq!(rows[2], "1\t3/8\t1/8\t3/8\t1/8\ttrue");
    // A_2 = α² + γ² and B_2 = 2αγ.
    assert_eq!(rows[3], "2\t5/32\t3/32\t5/32\t3/32\ttrue");
}

#[test]
fn bound_prints_reduction() {
    let out = bin(&["bound", "--mode", "quadratic", "--lambda", "1", "--beta", "1", "--epsilon", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("alpha = 3/8"));
    assert!(text.contains("omega = 2"));
    assert!(text.contains("C = 1.5"));
    assert!(text.contains("S = 1\n"));
    assert!(text.contains("bound = 3\n"));

    let out = bin(&["bound", "--mode", "additive", "--M", "0", "--beta", "1"]);
    assert_eq!(out.status.code(), Some(2));
}
