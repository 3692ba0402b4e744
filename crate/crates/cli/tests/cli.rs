//! End-to-end checks of the binary: exit-status contract, output files,
//! precedence, and overwrite protection.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_transitory-sim"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tsim-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn mu_prints_closed_form_value() {
    let out = run(&["mu", "--model", "exp:1", "--T", "1", "--n", "9"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let value: f64 = text.trim().parse().expect("numeric output");
    assert!((value - 0.1).abs() < 1e-8, "mu = {value}");
}

#[test]
fn missing_seed_exits_2() {
    let out = run(&["sample", "--model", "exp:10", "--n", "10"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--seed"), "{err}");
}

#[test]
fn unknown_flag_and_subcommand_exit_2() {
    assert_eq!(run(&["verify", "--seed", "1", "--bogus", "2"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn verify_inverse_bound_passes_and_writes_outputs() {
    let dir = temp_dir("inverse");
    let out = run(&[
        "verify",
        "--experiment",
        "inverse_bound",
        "--model",
        "exp:1",
        "--n",
        "10,25",
        "--reps",
        "120",
        "--seed",
        "42",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for file in ["report.json", "summary.csv", "paths.csv"] {
        assert!(dir.join(file).exists(), "missing {file}");
    }
    let report = std::fs::read_to_string(dir.join("report.json")).unwrap();
    assert!(report.contains("\"passed\": true"));
    assert!(report.contains("\"seed\": 42"));
    assert!(report.contains("config_sha256"));
    let summary = std::fs::read_to_string(dir.join("summary.csv")).unwrap();
    assert!(summary.starts_with("# seed=42 config_sha256="));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PASS"), "{stdout}");
}

#[test]
fn refuses_overwrite_without_force_then_allows_with_force() {
    let dir = temp_dir("force");
    let args = [
        "verify",
        "--experiment",
        "inverse_bound",
        "--model",
        "exp:1",
        "--n",
        "10",
        "--reps",
        "100",
        "--seed",
        "7",
        "--out",
        dir.to_str().unwrap(),
    ];
    assert_eq!(run(&args).status.code(), Some(0));
    let second = run(&args);
    assert_eq!(second.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&second.stderr).contains("--force"));
    let mut forced: Vec<&str> = args.to_vec();
    forced.push("--force");
    assert_eq!(run(&forced).status.code(), Some(0));
}

#[test]
fn failing_verdict_exits_1() {
    // A rejection level of 0.9999 makes the exact-null KS checks fail.
    let dir = temp_dir("fail");
    let out = run(&[
        "verify",
        "--experiment",
        "os_vs_rejection",
        "--model",
        "exp:10",
        "--n",
        "10",
        "--reps",
        "200",
        "--level",
        "0.9999",
        "--seed",
        "5",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.join("report.json")).unwrap();
    assert!(report.contains("\"passed\": false"));
}

#[test]
fn config_file_is_read_and_flags_override() {
    let dir = temp_dir("config");
    let config_path = dir.join("run.cfg");
    std::fs::write(
        &config_path,
        "experiment=inverse_bound\nmodel.family=exponential\nmodel.rate=1.0\nn=10\nreps=100\nseed=3\n",
    )
    .unwrap();
    let out = run(&[
        "verify",
        "--config",
        config_path.to_str().unwrap(),
        "--reps",
        "110",
        "--out",
        dir.join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.join("out/report.json")).unwrap();
    assert!(report.contains("\"replications\": 110"), "flag must override config");
    assert!(report.contains("\"seed\": 3"));
}

#[test]
fn sample_writes_both_formats() {
    let dir = temp_dir("sample");
    let out = run(&[
        "sample",
        "--sampler",
        "os",
        "--model",
        "poisson:10",
        "--n",
        "10",
        "--reps",
        "20",
        "--seed",
        "11",
        "--format",
        "csv",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("samples.csv")).unwrap();
    assert!(csv.starts_with("# seed=11"));
    assert_eq!(csv.lines().count(), 2 + 20 * 10);

    let out = run(&[
        "sample",
        "--model",
        "exp:10",
        "--n",
        "10",
        "--reps",
        "5",
        "--seed",
        "11",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let json = std::fs::read_to_string(dir.join("samples.json")).unwrap();
    assert!(json.contains("\"samples\""));
}

#[test]
fn simulate_workload_writes_report() {
    let dir = temp_dir("workload");
    let out = run(&[
        "simulate-workload",
        "--n",
        "50",
        "--reps",
        "30",
        "--grid",
        "64",
        "--seed",
        "13",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.join("report.json")).unwrap();
    assert!(report.contains("workload_endpoint_mean"));
    assert!(dir.join("paths.csv").exists());
}

#[test]
fn report_subcommand_round_trips() {
    let dir = temp_dir("report");
    let out = run(&[
        "verify",
        "--experiment",
        "inverse_bound",
        "--model",
        "exp:1",
        "--n",
        "10",
        "--reps",
        "100",
        "--seed",
        "9",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["report", "--input", dir.join("report.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("overall: PASS"), "{text}");

    // Tampered config must be caught by the hash check.
    let original = std::fs::read_to_string(dir.join("report.json")).unwrap();
    let tampered = original.replace("\"replications\": 100", "\"replications\": 101");
    assert_ne!(original, tampered);
    std::fs::write(dir.join("tampered.json"), tampered).unwrap();
    let out = run(&["report", "--input", dir.join("tampered.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn compare_ht_runs_reduced() {
    let dir = temp_dir("ht");
    let out = run(&[
        "compare-ht",
        "--n",
        "60",
        "--reps",
        "200",
        "--ks-max",
        "0.3",
        "--seed",
        "21",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.join("report.json")).unwrap();
    assert!(report.contains("ht_compare"));
}
