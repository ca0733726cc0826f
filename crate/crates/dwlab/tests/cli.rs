//! End-to-end tests of the installed binary: exit codes, file outputs, and
//! the config-hash guard.

use std::path::Path;
use std::process::{Command, Output};

fn dwlab(args: &[&str], out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dwlab"));
    cmd.args(args);
    match out {
        Some(dir) => cmd.env("DWLAB_OUT", dir),
        None => cmd.env_remove("DWLAB_OUT"),
    };
    cmd.output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn admissible_prints_table() {
    let out = dwlab(&["admissible", "--set", "n=1", "--set", "p=2"], None);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("alpha"));
    assert!(text.contains("overall: pass"));
}

#[test]
fn admissible_rejects_bad_exponent() {
    let out = dwlab(&["admissible", "--set", "n=2", "--set", "p=0.9"], None);
    assert_eq!(code(&out), 2);
    let text = String::from_utf8(out.stderr).unwrap();
    assert!(text.contains("p > max{1, n/2}"), "stderr: {text}");
}

#[test]
fn unknown_subcommand_is_64() {
    let out = dwlab(&["no-such-thing"], None);
    assert_eq!(code(&out), 64);
}

#[test]
fn solve_then_decay_fit_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "--set", "points=1024", "--set", "half_length=40", "--set", "t_end=20",
        "--set", "dt=0.25", "--set", "eps=0.01",
    ];
    let mut solve_args = vec!["solve"];
    solve_args.extend_from_slice(&args);
    let out = dwlab(&solve_args, Some(dir.path()));
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("norms.csv").is_file());
    assert!(dir.path().join("meta.txt").is_file());
    assert!(dir.path().join("final.snap").is_file());

    let mut fit_args = vec!["decay-fit"];
    fit_args.extend_from_slice(&args);
    let out = dwlab(&fit_args, Some(dir.path()));
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("slope"));

    // mismatched config is refused
    let mut bad_args = fit_args.clone();
    bad_args.extend_from_slice(&["--set", "p=1.9"]);
    let out = dwlab(&bad_args, Some(dir.path()));
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("hash mismatch"));
}

#[test]
fn solve_rejects_wraparound_risk() {
    let dir = tempfile::tempdir().unwrap();
    // box too small for the support plus the propagation time
    let out = dwlab(
        &[
            "solve", "--set", "points=256", "--set", "half_length=10",
            "--set", "t_end=20", "--set", "ic.width=1",
        ],
        Some(dir.path()),
    );
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("wrap-around"));
}

#[test]
fn config_file_drives_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "grid.points = 512\ngrid.half_length = 30\nsolve.t_end = 10\nsolve.dt = 0.25\nic.eps = 0.01\n",
    )
    .unwrap();
    let run_dir = dir.path().join("out");
    let out = dwlab(
        &["solve", "--config", cfg.to_str().unwrap()],
        Some(&run_dir),
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let meta = std::fs::read_to_string(run_dir.join("meta.txt")).unwrap();
    assert!(meta.contains("grid.points = 512"));
    assert!(meta.contains("config_hash = "));
}

#[test]
fn kernel_verify_passes() {
    let out = dwlab(&["kernel-verify", "--set", "points=1024"], None);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("max"));
}
