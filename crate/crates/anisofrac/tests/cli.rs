//! Contract tests of the command-line interface: output formats, exit
//! codes, and byte-level reproducibility of reports.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_anisofrac"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

const PROBLEM: &str = r#"{
  "groups": [{"dim": 1, "s": 0.5, "a": 1.0}, {"dim": 1}],
  "radii": [1.0, 1.0],
  "quadrature": {"radial_nodes": 96}
}"#;

#[test]
fn constants_prints_kernel_constants_json() {
    let out = bin()
        .args(["constants", "--N", "1", "--s", "0.5"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let c = v["c"].as_f64().unwrap();
    assert!((c - 0.15915494309189535).abs() < 1e-12, "c = {c}");
    assert!((v["c_tilde_standard"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["c_tilde_half"].as_f64().unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
}

#[test]
fn invalid_config_exits_two_and_names_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("problem.json");
    write(
        &cfg,
        r#"{"groups": [{"dim": 1, "s": 0.5, "a": 1.0}, {"dim": 1}], "radik": [1, 1]}"#,
    );
    let out = bin()
        .args(["barriers", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("radik"),
        "diagnostic should name the key: {err}"
    );
}

#[test]
fn unsupported_group_dimension_is_internal_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("problem.json");
    write(
        &cfg,
        r#"{"groups": [{"dim": 3, "s": 0.5, "a": 1.0}, {"dim": 1}], "radii": [1.0, 1.0]}"#,
    );
    let field = dir.path().join("field.json");
    write(&field, r#"{"preset": "separable-bump"}"#);
    let points = dir.path().join("points.csv");
    write(&points, "0.0,0.0,0.0,0.0\n");
    let out = bin()
        .args(["apply", "--config"])
        .arg(&cfg)
        .args(["--field"])
        .arg(&field)
        .args(["--points"])
        .arg(&points)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn apply_emits_value_and_error_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("problem.json");
    write(&cfg, PROBLEM);
    let field = dir.path().join("field.json");
    write(
        &field,
        r#"{"preset": "fractional-bump", "group": 1, "s": 0.5, "radius": 1.0}"#,
    );
    let points = dir.path().join("points.csv");
    write(&points, "0.0,0.0\n0.3,0.1\n");
    let out = bin()
        .args(["apply", "--config"])
        .arg(&cfg)
        .args(["--field"])
        .arg(&field)
        .args(["--points"])
        .arg(&points)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(|l| l.split(',').map(|t| t.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].len(), 4); // x1, x2, value, error
                                  // the profile is constant in x_n, so L u = a * ct(1,1/2) = 1 inside
    assert!((rows[0][2] - 1.0).abs() < 1e-4, "row {:?}", rows[0]);
    assert!(rows[0][3] >= 0.0);
}

#[test]
fn solve_writes_solution_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("problem.json");
    write(
        &cfg,
        r#"{
  "groups": [{"dim": 1, "s": 0.5, "a": 1.0}, {"dim": 1}],
  "radii": [1.0, 1.0],
  "h": 0.25,
  "rhs": {"preset": "affine", "constant": 1.0, "slope": 0.0},
  "exterior": {"preset": "affine", "constant": 0.0, "slope": 0.0},
  "quadrature": {"radial_nodes": 96}
}"#,
    );
    let out_path = dir.path().join("solution.json");
    let out = bin()
        .args(["solve", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!(v["residual"].as_f64().unwrap() < 1e-10);
    let shape: Vec<usize> = v["shape"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t.as_u64().unwrap() as usize)
        .collect();
    let values = v["values"].as_array().unwrap();
    assert_eq!(values.len(), shape.iter().product::<usize>());
}

#[test]
fn verify_main_report_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("problem.json");
    write(&cfg, PROBLEM);
    let report = dir.path().join("report.json");
    let plot = dir.path().join("plot.csv");
    let out = bin()
        .args(["verify-main", "--preset", "separable-bump", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&report)
        .args(["--emit-plot-data"])
        .arg(&plot)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["check"], "main-gradient-estimate");
    assert_eq!(v["pass"], true);
    assert_eq!(v["probes"].as_array().unwrap().len(), 20);
    let plot_text = std::fs::read_to_string(&plot).unwrap();
    assert!(plot_text.starts_with("y,lhs,rhs\n"));
    assert_eq!(plot_text.lines().count(), 21);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("problem.json");
    write(&cfg, PROBLEM);
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out_path in [&a, &b] {
        let out = bin()
            .args(["barriers", "--config"])
            .arg(&cfg)
            .args(["--probes", "4", "--seed", "11", "--threads", "1", "--out"])
            .arg(out_path)
            .output()
            .unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    assert_eq!(
        bytes_a, bytes_b,
        "same seed and thread count must reproduce bytes"
    );
}

#[test]
fn localize_check_passes_on_wide_bump() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("problem.json");
    write(&cfg, PROBLEM);
    let out = bin()
        .args(["localize-check", "--config"])
        .arg(&cfg)
        .args(["--probes", "3", "--seed", "5"])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], true);
    // the validated tail coefficient is recorded in the report
    let b1 = v["checks"][0]["params"]["b_1"].as_f64().unwrap();
    assert!((b1 - 1.0 / std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn verify_holder_runs_default_family() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("problem.json");
    write(&cfg, PROBLEM);
    let out = bin()
        .args(["verify-holder", "--config"])
        .arg(&cfg)
        .args(["--pairs", "20000", "--seed", "3"])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["check"], "holder-ratio-probe");
    assert_eq!(v["pass"], true);
}
