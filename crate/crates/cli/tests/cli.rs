//! End-to-end tests of the benchmark binary: exit codes, CSV shapes, and
//! determinism of the emitted files.

use std::fs;
use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_fkrylov");

fn write_identity2(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("identity2.mtx");
    fs::write(
        &path,
        "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n2 2 1.0\n",
    )
    .unwrap();
    path
}

/// Strips the wall-clock columns (elapsed_s in histories, CPU_s in the
/// summary) so runs can be compared for determinism.
fn strip_timing(csv: &str) -> String {
    let mut out = String::new();
    for (i, line) in csv.lines().enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
        let drop = header
            .iter()
            .position(|h| *h == "elapsed_s" || *h == "CPU_s")
            .unwrap();
        for (j, c) in cols.iter().enumerate() {
            if j == drop {
                continue;
            }
            out.push_str(c);
            out.push(',');
        }
        out.push('\n');
        let _ = i;
    }
    out
}

#[test]
fn identity_converges_at_first_step() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = write_identity2(dir.path());
    let out = dir.path().join("run");
    let status = Command::new(BIN)
        .args([
            "run",
            "--problem",
            &format!("mm:{}", mtx.display()),
            "--methods",
            "rfks",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let history = fs::read_to_string(out.join("rfks_history.csv")).unwrap();
    let lines: Vec<&str> = history.lines().collect();
    assert_eq!(lines.len(), 2, "expected header + one row:\n{history}");
    assert!(lines[0].starts_with("step,theta_re,theta_im,resnorm,relresnorm,mv_total"));
    let cols: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cols[0], "0");
    let theta: f64 = cols[1].parse().unwrap();
    let res: f64 = cols[3].parse().unwrap();
    assert!((theta - 1.0).abs() <= 1e-14);
    assert_eq!(res, 0.0);
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.lines().count() == 2);
    assert!(summary.contains("rfks,"));
    assert!(summary.trim_end().ends_with("true"));
}

#[test]
fn outputs_are_deterministic_modulo_timing() {
    let dir = tempfile::tempdir().unwrap();
    let (out1, out2) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&out1, &out2] {
        let status = Command::new(BIN)
            .args([
                "run", "--problem", "case1", "--N", "6", "--methods", "rfks,fks,cd,ac", "--m",
                "6", "--nr", "10", "--seed", "5", "--out",
            ])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    for name in [
        "rfks_history.csv",
        "fks_history.csv",
        "cd_history.csv",
        "ac_history.csv",
        "summary.csv",
    ] {
        let a = strip_timing(&fs::read_to_string(out1.join(name)).unwrap());
        let b = strip_timing(&fs::read_to_string(out2.join(name)).unwrap());
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn fk_seed_env_matches_seed_flag() {
    let dir = tempfile::tempdir().unwrap();
    let (out1, out2) = (dir.path().join("a"), dir.path().join("b"));
    let status = Command::new(BIN)
        .args([
            "run", "--problem", "case1", "--N", "5", "--methods", "rfks", "--m", "4", "--nr",
            "8", "--seed", "77", "--out",
        ])
        .arg(&out1)
        .status()
        .unwrap();
    assert!(status.success());
    let status = Command::new(BIN)
        .args([
            "run", "--problem", "case1", "--N", "5", "--methods", "rfks", "--m", "4", "--nr",
            "8", "--seed", "0", "--out",
        ])
        .arg(&out2)
        .env("FK_SEED", "77")
        .status()
        .unwrap();
    assert!(status.success());
    let a = strip_timing(&fs::read_to_string(out1.join("rfks_history.csv")).unwrap());
    let b = strip_timing(&fs::read_to_string(out2.join("rfks_history.csv")).unwrap());
    assert_eq!(a, b);
}

#[test]
fn nonconvergence_exits_two_and_still_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = Command::new(BIN)
        .args([
            "run",
            "--problem",
            "case1",
            "--N",
            "6",
            "--methods",
            "rfks",
            "--max-outer",
            "2",
            "--tol",
            "1e-14",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.trim_end().ends_with("false"), "{summary}");
}

#[test]
fn bad_flags_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(BIN)
        .args(["run", "--problem", "case3", "--out"])
        .arg(dir.path().join("x"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    let status = Command::new(BIN)
        .args(["run", "--problem", "case1", "--methods", "nope", "--out"])
        .arg(dir.path().join("y"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn verify_small_sample_passes() {
    let output = Command::new(BIN)
        .args(["verify", "--samples", "100"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    let passes = stdout.matches("PASS").count();
    assert_eq!(passes, 5, "expected five suites:\n{stdout}");
    assert!(!stdout.contains("FAIL"));
}
