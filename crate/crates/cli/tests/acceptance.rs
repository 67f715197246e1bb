//! Acceptance criterion 8: re-running any manifest reproduces byte-identical
//! primary artifacts. Each representative invocation runs once, then runs
//! again in a fresh directory from nothing but the recorded manifest argv;
//! all artifacts and the stdout stream must match byte for byte.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run_in(dir: &Path, args: &[String]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eigentrace"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn rerun_case(args: &[&str]) -> Result<(), String> {
    let args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    let first_dir = tempfile::tempdir().unwrap();
    let first = run_in(first_dir.path(), &args);
    if !first.status.success() {
        return Err(format!(
            "first run failed: {}",
            String::from_utf8_lossy(&first.stderr)
        ));
    }

    // Locate the manifest written by the run.
    let manifest_path = std::fs::read_dir(first_dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .find(|p| p.to_string_lossy().ends_with(".manifest.json"))
        .ok_or("no manifest written")?;
    let manifest: Value =
        serde_json::from_slice(&std::fs::read(&manifest_path).unwrap()).unwrap();
    let argv: Vec<String> = manifest["argv"]
        .as_array()
        .ok_or("manifest missing argv")?
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();

    // Re-run from the manifest alone, in a fresh directory.
    let second_dir = tempfile::tempdir().unwrap();
    let second = run_in(second_dir.path(), &argv);
    if !second.status.success() {
        return Err(format!(
            "manifest re-run failed: {}",
            String::from_utf8_lossy(&second.stderr)
        ));
    }

    if first.stdout != second.stdout {
        return Err("stdout differs between runs".into());
    }
    for output in manifest["outputs"].as_array().unwrap() {
        let rel = output.as_str().unwrap();
        let a = std::fs::read(first_dir.path().join(rel))
            .map_err(|e| format!("{rel}: {e}"))?;
        let b = std::fs::read(second_dir.path().join(rel))
            .map_err(|e| format!("{rel} missing on re-run: {e}"))?;
        if a != b {
            return Err(format!("artifact {rel} differs between runs"));
        }
    }
    // The manifests themselves agree as well.
    let b = std::fs::read(second_dir.path().join(manifest_path.file_name().unwrap()))
        .map_err(|e| format!("manifest missing on re-run: {e}"))?;
    if std::fs::read(&manifest_path).unwrap() != b {
        return Err("manifest differs between runs".into());
    }
    Ok(())
}

#[test]
fn acceptance_c8_manifest_reruns_are_byte_identical() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["beta", "--a1", "4", "--aN", "1", "--out", "beta.json"],
        vec![
            "constants", "--weights", "1,0,1", "--ch", "0.5", "--usup", "2", "--fsup", "1",
            "--delta", "0.5", "--out", "constants.json",
        ],
        vec![
            "barrier", "--A", "0.5", "--B", "1", "--C", "2", "--D", "1", "--delta", "1",
            "--verify", "--nodes", "100", "--export", "barrier.csv", "--out", "barrier.json",
        ],
        vec![
            "solve", "--a1", "1", "--a2", "2", "--nx", "17", "--ny", "17", "--stencil-width",
            "2", "--f", "sin(x+y)", "--g", "abs(x-0.3)+0.5*y", "--out", "u.csv",
        ],
        vec![
            "counterexample", "--blowup", "--alphas", "0.25,0.5,1", "--kmax", "12", "--out",
            "blowup.csv",
        ],
        vec![
            "counterexample", "--supersolution", "--trials", "5", "--dim", "3", "--seed", "9",
            "--out", "super.json",
        ],
        vec![
            "proofcheck", "--draws", "300", "--pairs", "40", "--trials", "100", "--sweep", "5",
            "--seed", "3", "--out", "proofcheck.json",
        ],
    ];

    let mut failures = Vec::new();
    for case in &cases {
        if let Err(e) = rerun_case(case) {
            failures.push(format!("{case:?}: {e}"));
        }
    }
    let passed = failures.is_empty();
    println!(
        "ACCEPTANCE C8 manifest re-run determinism: {} ({} invocations{})",
        if passed { "PASS" } else { "FAIL" },
        cases.len(),
        if passed {
            ", all artifacts byte-identical".to_string()
        } else {
            format!("; {}", failures.join("; "))
        }
    );
    assert!(passed, "{failures:?}");
}
