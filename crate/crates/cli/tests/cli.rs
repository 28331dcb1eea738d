use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thetabound"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn theta_on_integer_line_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("z1.json");
    std::fs::write(&f, r#"{"dim": 1, "basis": [[1.0]]}"#).unwrap();
    let o = run(&["theta", "--lattice", f.to_str().unwrap(), "--family", "gaussian", "--tol", "1e-10"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    let d = &v["records"][0]["details"];
    assert!((d["partial"].as_f64().unwrap() - 1.086435).abs() < 1e-6);
    assert!(d["remainder_bound"].as_f64().unwrap() <= 1e-10);
    assert!(d["truncation_radius"].as_f64().unwrap() > 0.0);
}

#[test]
fn missing_basis_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.json");
    std::fs::write(&f, r#"{"dim": 2}"#).unwrap();
    let o = run(&["theta", "--lattice", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("basis"));
}

#[test]
fn zero_scale_is_a_precondition_error() {
    let o = run(&["theta", "--integer", "1", "--t", "0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("t > 0"));
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(3));
    assert_eq!(run(&["theta"]).status.code(), Some(3));
}

#[test]
fn budget_exhaustion_exits_four() {
    let o = run(&["theta", "--integer", "3", "--node-budget", "5"]);
    assert_eq!(o.status.code(), Some(4));
    let v = stdout_json(&o);
    assert_eq!(v["records"][0]["verdict"], "ERROR");
}

#[test]
fn constants_table() {
    let o = run(&["constants"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert!((v["cstar"].as_f64().unwrap() - 0.42479).abs() < 5e-5);
    assert!(v["l1_constant"]["exact"].as_f64().unwrap() < 0.154264);
    let t = v["transference"].as_array().unwrap();
    let n1 = t.iter().find(|r| r["n"] == 1).unwrap();
    assert!((n1["l2"].as_f64().unwrap() - 1.11408).abs() < 1e-5);
    let h = v["handshake"].as_array().unwrap();
    let row = h.iter().find(|r| r["n"] == 4 && r["p"] == 2.0 && r["u"] == 1.0).unwrap();
    assert!((row["bound"].as_f64().unwrap() - 401.71).abs() < 0.01);
}

#[test]
fn constants_rejects_empty_grid() {
    let o = run(&["constants", "--n", ""]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn kissing_on_checkerboard() {
    let o = run(&["kissing", "--checkerboard", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["records"][0]["details"]["count"], 24);
}

#[test]
fn psf_tail_and_transference_pass() {
    for args in [
        &["psf", "--integer", "2", "--family", "inv_cosh_product", "--v", "0.3,0.1", "--t", "1.5"][..],
        &["tail", "--integer", "3", "--tau", "1"][..],
        &["tail", "--integer", "2", "--family", "supergaussian", "--fp", "1", "--body-p", "1", "--body-t", "1.2"][..],
        &["transference", "--integer", "2", "--p", "1", "--resolution", "8"][..],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn lattice_write_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("s.json");
    let o = run(&["lattice", "--kind", "seeded", "--dim", "3", "--seed", "9", "--out", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let a = thetabound::lattice::io::read_lattice(&f).unwrap();
    let b: thetabound::Lattice64 = thetabound::lattice::generate::seeded(3, 9).unwrap();
    for (x, y) in a.basis().iter().flatten().zip(b.basis().iter().flatten()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
    let o = run(&["enumerate", "--lattice", f.to_str().unwrap(), "--radius", "0"]);
    assert_eq!(stdout_json(&o)["count"], 1);
}

fn write_manifest(dir: &Path, body: &str) -> std::path::PathBuf {
    let p = dir.join("m.json");
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn verify_unknown_check_fails_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(dir.path(), r#"{"checks": [{"check": "cstar"}, {"check": "bogus"}]}"#);
    let o = run(&["verify", m.to_str().unwrap(), "--output", "-"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}

#[test]
fn verify_empty_checks_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(dir.path(), r#"{"checks": []}"#);
    assert_eq!(run(&["verify", m.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn verify_fail_beats_everything() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(
        dir.path(),
        r#"{"checks": [
            {"check": "handshake", "lattice": {"integer": 2}, "p": 2, "u": 1, "expect_count": 5},
            {"check": "theta", "lattice": {"integer": 3}, "function": {"family": "gaussian"}}
        ], "budgets": {"nodes": 1000, "grid": 1000}}"#,
    );
    let o = run(&["verify", m.to_str().unwrap(), "--output", "-"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_writes_report_and_plot_data_relative_to_manifest() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("l.json"), r#"{"dim": 2, "basis": [[1, 0], [0.5, 1]]}"#).unwrap();
    let m = write_manifest(
        dir.path(),
        r#"{"lattice_file": "l.json", "seed": 5, "output": "r.json", "plot_data": "p.csv",
            "checks": [
              {"check": "tail", "function": {"family": "gaussian"}, "body": {"p": 2, "tau": 1}, "v": "random"},
              {"check": "psf", "function": {"family": "gaussian"}, "v": "random", "t": 1.5}
            ]}"#,
    );
    let o = run(&["verify", m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["summary"]["pass"], 2);
    let csv = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
    assert!(csv.starts_with("index,lattice,radius,tail_upper,bound"));
    assert_eq!(csv.lines().count(), 7);
}
