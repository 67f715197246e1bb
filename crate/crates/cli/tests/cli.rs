//! End-to-end behavior of the command-line interface.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eigentrace"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn help_exits_zero_everywhere() {
    let top = bin().arg("--help").output().unwrap();
    assert_eq!(top.status.code(), Some(0));
    for sub in [
        "beta",
        "constants",
        "barrier",
        "solve",
        "holder",
        "counterexample",
        "proofcheck",
    ] {
        let out = bin().args([sub, "--help"]).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{sub} --help");
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.contains("--seed"), "{sub} help misses global flags");
    }
    // Every flag named in the solve interface shows up in its help.
    let solve_help = bin().args(["solve", "--help"]).output().unwrap();
    let text = String::from_utf8_lossy(&solve_help.stdout);
    for flag in [
        "--a1", "--a2", "--nx", "--ny", "--h", "--stencil-width", "--tau", "--tol",
        "--max-iter", "--f", "--g", "--H", "--out",
    ] {
        assert!(text.contains(flag), "solve help misses {flag}");
    }
}

#[test]
fn beta_prints_exact_half() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["beta", "--a1", "1", "--aN", "1"]);
    let json = stdout_json(&out);
    assert_eq!(json["beta"], serde_json::json!(0.5));
}

#[test]
fn constants_emit_the_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "constants", "--weights", "1,1", "--usup", "1", "--fsup", "1", "--delta", "1",
        ],
    );
    let json = stdout_json(&out);
    assert_eq!(json["beta"], serde_json::json!(0.5));
    assert_eq!(json["L"], serde_json::json!(2.0));
    assert_eq!(json["D"], serde_json::json!(2.0));
    assert_eq!(json["C"], serde_json::json!(3.0));
    assert_eq!(json["B"], serde_json::json!(0.0));
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["beta", "--a1", "0", "--aN", "1"],
        vec!["beta", "--a1", "1"],
        vec!["beta", "--a1", "1", "--aN", "1", "--bogus"],
        vec!["counterexample", "--alphas", "0.5"],
        vec![
            "solve", "--a1", "1", "--a2", "1", "--nx", "9", "--ny", "9", "--f", "1", "--g",
            "nosuchfn(x)", "--out", "u.csv",
        ],
        vec![
            "solve", "--a1", "1", "--a2", "1", "--nx", "9", "--ny", "9", "--f", "1", "--g", "0",
            "--H", "cubic", "--out", "u.csv",
        ],
        vec!["barrier", "--A", "1.5", "--C", "1", "--delta", "1"],
    ] {
        let out = run_in(dir.path(), &args);
        assert_eq!(out.status.code(), Some(1), "args: {args:?}");
    }
}

#[test]
fn divergence_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "solve", "--a1", "1", "--a2", "2", "--nx", "17", "--ny", "17", "--f", "0", "--g",
            "10*(x-y)", "--H", "power:-400,0,2", "--out", "u.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("numerical failure"), "stderr: {err}");
}

#[test]
fn barrier_verify_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "barrier", "--A", "0.5", "--B", "0", "--C", "1", "--D", "1", "--delta", "1",
            "--verify", "--export", "barrier.csv",
        ],
    );
    let json = stdout_json(&out);
    let k = json["K"].as_f64().unwrap();
    assert!((k - 5.0 / 3.0).abs() <= 1e-10);
    for check in [
        "derivative_signs",
        "concavity_gap",
        "terminal_value",
        "growth_bound",
    ] {
        assert_eq!(
            json["report"][check]["passed"],
            serde_json::json!(true),
            "{check}"
        );
    }
    let csv = std::fs::read_to_string(dir.path().join("barrier.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,phi,phi_prime,phi_double_prime"));
    assert_eq!(lines.count(), 200);
}

#[test]
fn counterexample_blowup_rows_increase() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["counterexample", "--blowup", "--alphas", "0.5", "--kmax", "6"],
    );
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,k,t,ratio"));
    let ratios: Vec<f64> = lines
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(ratios.len(), 6);
    for w in ratios.windows(2) {
        assert!(w[1] > w[0], "{ratios:?}");
    }
}

#[test]
fn counterexample_reports_are_json() {
    let dir = tempfile::tempdir().unwrap();
    let conc = run_in(dir.path(), &["counterexample", "--concavity", "--samples", "200"]);
    let json = stdout_json(&conc);
    assert_eq!(json["violations"], serde_json::json!(0));

    let off = run_in(
        dir.path(),
        &["counterexample", "--offplane", "--weights", "0,1,1,0", "--samples", "100"],
    );
    let json = stdout_json(&off);
    assert_eq!(json["violations"], serde_json::json!(0));

    let sup = run_in(
        dir.path(),
        &["counterexample", "--supersolution", "--trials", "5", "--seed", "1"],
    );
    let json = stdout_json(&sup);
    assert_eq!(json["violations"], serde_json::json!(0));
    assert_eq!(json["inconclusive"], serde_json::json!(false));
}

#[test]
fn solve_then_holder_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "solve", "--a1", "1", "--a2", "2", "--nx", "65", "--ny", "65", "--tol", "1e-6",
            "--f", "1", "--g", "abs(x+y-1)", "--out", "u.csv",
        ],
    );
    let summary = stdout_json(&out);
    assert!(summary["iterations"].as_u64().unwrap() > 0);
    assert!(summary["residual"].as_f64().unwrap() <= 1e-6);
    let alpha = summary["alpha_hat"].as_f64().unwrap();
    assert!(alpha > 0.3, "alpha_hat = {alpha}");
    assert!(summary["seminorm"].as_f64().unwrap() > 0.0);
    assert!(dir.path().join("u.csv.summary.json").exists());
    assert!(dir.path().join("u.csv.manifest.json").exists());

    let holder = run_in(dir.path(), &["holder", "--input", "u.csv"]);
    let json = stdout_json(&holder);
    let fitted = json["alpha_hat"].as_f64().unwrap();
    assert!((fitted - alpha).abs() <= 1e-9, "{fitted} vs {alpha}");

    // Seminorm at a chosen exponent on the full region.
    let holder_full = run_in(
        dir.path(),
        &["holder", "--input", "u.csv", "--beta", "0.5", "--region", "full"],
    );
    let json = stdout_json(&holder_full);
    assert_eq!(json["beta"], serde_json::json!(0.5));
    assert!(json["seminorm"].as_f64().unwrap() > 0.0);
}

#[test]
fn solve_accepts_csv_inputs_for_f_and_g() {
    let dir = tempfile::tempdir().unwrap();
    // Build a right-hand side grid with one run, feed it to another.
    let first = run_in(
        dir.path(),
        &[
            "solve", "--a1", "1", "--a2", "1", "--nx", "17", "--ny", "17", "--f", "0", "--g",
            "x*x-y*y", "--out", "base.csv",
        ],
    );
    assert!(first.status.success());
    let second = run_in(
        dir.path(),
        &[
            "solve", "--a1", "1", "--a2", "1", "--nx", "17", "--ny", "17", "--f", "0", "--g",
            "base.csv", "--out", "again.csv",
        ],
    );
    assert!(second.status.success());
    // Same boundary data, same equation: same solution bytes.
    let a = std::fs::read(dir.path().join("base.csv")).unwrap();
    let b = std::fs::read(dir.path().join("again.csv")).unwrap();
    assert_eq!(a, b);

    // Layout mismatch is a validation error.
    let bad = run_in(
        dir.path(),
        &[
            "solve", "--a1", "1", "--a2", "1", "--nx", "33", "--ny", "33", "--f", "0", "--g",
            "base.csv", "--out", "bad.csv",
        ],
    );
    assert_eq!(bad.status.code(), Some(1));
}
