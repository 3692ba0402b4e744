//! Acceptance: rerunning any `verify` invocation with the same seed must
//! produce byte-identical output files.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tsim-acc-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_verify(args: &[&str], out: &Path) {
    let status = Command::new(env!("CARGO_BIN_EXE_transitory-sim"))
        .args(args)
        .args(["--out", out.to_str().unwrap()])
        .status()
        .expect("binary runs");
    assert!(status.success(), "verify failed in {}", out.display());
}

#[test]
fn criterion_12_verify_reruns_are_byte_identical() {
    let started = Instant::now();
    let invocations: [&[&str]; 2] = [
        &[
            "verify", "--experiment", "exchangeability", "--model", "exp:12", "--n", "12",
            "--reps", "400", "--seed", "99",
        ],
        &[
            "verify", "--experiment", "inverse_bound", "--model", "exp:1", "--n", "10,100",
            "--reps", "200", "--seed", "1234",
        ],
    ];
    for (k, args) in invocations.iter().enumerate() {
        let dir_a = temp_dir(&format!("det-{k}-a"));
        let dir_b = temp_dir(&format!("det-{k}-b"));
        run_verify(args, &dir_a);
        run_verify(args, &dir_b);
        for file in ["report.json", "summary.csv", "paths.csv"] {
            let a = std::fs::read(dir_a.join(file)).unwrap();
            let b = std::fs::read(dir_b.join(file)).unwrap();
            assert_eq!(a, b, "{file} differs between reruns of invocation {k}");
        }
    }
    println!(
        "ACCEPTANCE 12 determinism: PASS (2 invocations, 3 files each; {:.1} s)",
        started.elapsed().as_secs_f64()
    );
}
