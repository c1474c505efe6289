//! End-to-end checks of the binary: exit codes, validation messages, and
//! report files on disk.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_recenter"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn temp_out(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("recenter_cli_{tag}_{}", std::process::id()))
}

#[test]
fn passing_run_exits_zero_and_writes_reports() {
    let out = temp_out("ok");
    let status = bin()
        .args(["qm-equiv", "--config"])
        .arg(config("qm-equiv.toml"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("summary.json").is_file());
    assert!(out.join("qm_equivalence.csv").is_file());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["experiment"], "qm-equiv");
    assert_eq!(summary["all_pass"], true);
    // documented CSV schema for this experiment
    let csv = std::fs::read_to_string(out.join("qm_equivalence.csv")).unwrap();
    assert!(csv.starts_with("hamiltonian,dt,max_dev\n"));
    std::fs::remove_dir_all(&out).ok();
}

#[test]
fn json_format_embeds_tables() {
    let out = temp_out("json");
    let status = bin()
        .args(["qm-equiv", "--config"])
        .arg(config("qm-equiv.toml"))
        .arg("--out")
        .arg(&out)
        .args(["--format", "json", "--jobs", "2", "--seed", "5"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(!out.join("qm_equivalence.csv").exists());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 5);
    assert!(summary["tables"]["qm_equivalence"]["rows"].is_array());
    std::fs::remove_dir_all(&out).ok();
}

#[test]
fn malformed_config_exits_two_and_names_field() {
    let out = temp_out("bad");
    let bad = out.join("bad.toml");
    std::fs::create_dir_all(&out).unwrap();
    std::fs::write(
        &bad,
        r#"
experiment = "qm-equiv"

[parameters]
dim = 80
omega0 = 1.0
harmonic_omega = 1.0
quartic_omega = 1.0
quartic_g = 0.1
lambda = -2.0
n_labels = 4
label_scale = 0.4
dts = [0.0]
equality_threshold = 1e-10
"#,
    )
    .unwrap();
    let output = bin()
        .args(["qm-equiv", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr).to_lowercase();
    assert!(stderr.contains("lambda"), "stderr was: {stderr}");
    std::fs::remove_dir_all(&out).ok();
}

#[test]
fn mismatched_subcommand_exits_two() {
    let status = bin()
        .args(["phi4", "--config"])
        .arg(config("qm-equiv.toml"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn missing_config_exits_three() {
    let status = bin()
        .args(["qm-equiv", "--config", "/nonexistent/nope.toml"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}
