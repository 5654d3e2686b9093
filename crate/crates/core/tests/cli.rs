//! End-to-end tests of the command-line binary: exit codes, artifact
//! layout, and byte-determinism of CSV outputs.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const FAST_CONFIG: &str = "
[problem]
epsilon = 0.2
gamma = 1.0
beta = 1.0
p = 2.0

[functions]
h = sin
f = one

[mesh]
target_edge = 0.025
bulk_edge = 0.0625

[sweep]
eps_list = 0.2, 0.1
";

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("run.conf");
    fs::write(&path, text).unwrap();
    path
}

fn run_cli(dir: &Path, config: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plaplab"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(dir.join("results"))
        .args(args)
        .output()
        .expect("binary should launch")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn invalid_p_exits_2_with_message() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), &FAST_CONFIG.replace("p = 2.0", "p = 1.5"));
    let out = run_cli(tmp.path(), &cfg, &["solve-limit"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("p >= 2"), "stderr: {}", stderr_of(&out));
}

#[test]
fn unknown_registry_key_exits_2_listing_options() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), &FAST_CONFIG.replace("h = sin", "h = wiggle"));
    let out = run_cli(tmp.path(), &cfg, &["solve-limit"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
    let err = stderr_of(&out);
    assert!(
        err.contains("available: const, sin, xcos"),
        "stderr should list the registry: {err}"
    );
}

#[test]
fn malformed_config_exits_2() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "[problem\nepsilon = 0.1\n");
    let out = run_cli(tmp.path(), &cfg, &["solve-limit"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("malformed section header"));
}

#[test]
fn missing_config_flag_exits_2() {
    let tmp = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_plaplab"))
        .current_dir(tmp.path())
        .arg("solve-limit")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
}

#[test]
fn increasing_eps_override_exits_2() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), FAST_CONFIG);
    let out = run_cli(tmp.path(), &cfg, &["--eps-list", "0.1,0.2", "sweep"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("strictly decreasing"));
}

#[test]
fn solve_rough_writes_artifacts() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), FAST_CONFIG);
    let out = run_cli(tmp.path(), &cfg, &["solve-rough"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let dir = artifact_dir(tmp.path(), "solve-rough");
    for name in ["manifest.txt", "solution.vtk", "diagnostics.csv", "summary.txt"] {
        assert!(dir.join(name).exists(), "missing {name}");
    }
    let manifest = fs::read_to_string(dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("content_hash"));
}

#[test]
fn verify_mu_prints_table() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), FAST_CONFIG);
    let out = run_cli(tmp.path(), &cfg, &["verify", "mu"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let dir = artifact_dir(tmp.path(), "verify");
    assert!(dir.join("verify_mu.csv").exists());
}

#[test]
fn unknown_verify_table_exits_2() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), FAST_CONFIG);
    let out = run_cli(tmp.path(), &cfg, &["verify", "entropy"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
}

#[test]
fn sweep_csv_is_byte_deterministic() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), FAST_CONFIG);
    let first = run_cli(tmp.path(), &cfg, &["sweep"]);
    assert_eq!(first.status.code(), Some(0), "stderr: {}", stderr_of(&first));
    let dir = artifact_dir(tmp.path(), "sweep");
    let csv1 = fs::read(dir.join("sweep.csv")).unwrap();
    fs::remove_dir_all(tmp.path().join("results")).unwrap();
    let second = run_cli(tmp.path(), &cfg, &["sweep"]);
    assert_eq!(second.status.code(), Some(0), "stderr: {}", stderr_of(&second));
    let csv2 = fs::read(artifact_dir(tmp.path(), "sweep").join("sweep.csv")).unwrap();
    assert_eq!(csv1, csv2, "sweep.csv must be byte-identical across runs");
}

/// The artifact directory is results/<command>/<content-hash>/; exactly one
/// hash directory is expected per command in these tests.
fn artifact_dir(tmp: &Path, command: &str) -> std::path::PathBuf {
    let base = tmp.join("results").join(command);
    let mut entries: Vec<_> = fs::read_dir(&base)
        .unwrap_or_else(|_| panic!("missing {}", base.display()))
        .map(|e| e.unwrap().path())
        .collect();
    assert_eq!(entries.len(), 1, "expected one artifact dir in {}", base.display());
    entries.pop().unwrap()
}
