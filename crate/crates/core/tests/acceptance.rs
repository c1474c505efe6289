//! Acceptance suite: one test per criterion, each driving a shipped config
//! through the experiment runner and asserting the pinned thresholds. Every
//! test prints a single pass/fail line (visible with `--nocapture`).

use std::path::PathBuf;
use std::time::Instant;

use recenter::config::{load_config, ExperimentConfig};
use recenter::experiments::{run_and_emit, run_experiment, RunOptions};
use recenter::report::ReportBundle;

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn load(name: &str) -> ExperimentConfig {
    load_config(&config_path(name)).expect("shipped config must parse")
}

fn run(name: &str) -> (ReportBundle, f64) {
    let cfg = load(name);
    let start = Instant::now();
    let bundle = run_experiment(&cfg, &RunOptions::default()).expect("run must complete");
    (bundle, start.elapsed().as_secs_f64())
}

fn report_line(criterion: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {status} - {detail}");
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_01_classical_equivalence() {
    let (bundle, elapsed) = run("classical-equiv.toml");
    let max_dev = bundle.metrics["max_dev"];
    let drift = bundle.metrics["constraint_drift"];
    let pass = max_dev < 1e-6 && drift < 1e-8 && elapsed < 5.0;
    report_line(
        "1 (classical equivalence)",
        pass,
        &format!("max_dev {max_dev:.3e} < 1e-6, drift {drift:.3e} < 1e-8, {elapsed:.2}s < 5s"),
    );
}

#[test]
fn criterion_02_quantum_equivalence() {
    let (bundle, elapsed) = run("qm-equiv.toml");
    let max_dev = bundle.metrics["max_dev"];
    let pass = max_dev < 1e-10 && elapsed < 10.0;
    report_line(
        "2 (quantum equivalence theorem)",
        pass,
        &format!(
            "entrywise dev {max_dev:.3e} < 1e-10 for harmonic and quartic, {elapsed:.2}s < 10s"
        ),
    );
}

#[test]
fn criterion_03_free_field_recovery() {
    let (bundle, elapsed) = run("free-field.toml");
    let dev = bundle.metrics["recovery_max_dev"];
    let pass = dev < 1e-8 && elapsed < 60.0;
    report_line(
        "3 (free-field recovery)",
        pass,
        &format!("recentered vs relativistic dev {dev:.3e} < 1e-8, {elapsed:.2}s < 60s"),
    );
}

#[test]
fn criterion_04_width_erasure() {
    let (bundle, _) = run("free-field.toml");
    let dev = bundle.metrics["erasure_max_dev"];
    let pass = dev < 1e-8;
    report_line(
        "4 (fiducial-width erasure)",
        pass,
        &format!("kernels at widths 0.5 and 2.0 agree entrywise to {dev:.3e} < 1e-8"),
    );
}

#[test]
fn criterion_05_incompatibility_signals() {
    let (bundle, elapsed) = run("free-field-signals.toml");
    let damped = bundle.metrics["damped_overlap_at_n"];
    let time = bundle.metrics["time_kernel_modulus_at_n"];
    let decreasing = bundle
        .checks
        .iter()
        .filter(|c| c.name.contains("strictly decreasing"))
        .all(|c| c.pass);
    println!(
        "criterion 5 detail: damped {damped:.3e}, time {time:.3e} at N = 50; \
         per-mode time factor {:.6}; elapsed {elapsed:.2}s",
        bundle.metrics["per_mode_time_modulus"]
    );
    let pass = decreasing && damped < 0.01 && time < 0.01 && elapsed < 30.0;
    report_line(
        "5 (incompatibility signals)",
        pass,
        &format!(
            "strictly decreasing: {decreasing}; damped {damped:.3e} < 0.01; time {time:.3e} < 0.01"
        ),
    );
}

#[test]
fn criterion_06_interacting_pipeline() {
    let (bundle, elapsed) = run("phi4.toml");
    let e0_dev = bundle.metrics["e0_dev"];
    let kurt = bundle.metrics["kurtosis_excess"];
    let indep = bundle.metrics["m_independence_dev"];
    let pass = e0_dev < 1e-10 && kurt.abs() > 1e-6 && indep < 1e-6 && elapsed < 120.0;
    report_line(
        "6 (interacting pipeline)",
        pass,
        &format!(
            "E0 dev {e0_dev:.3e} < 1e-10, |kurtosis excess| {:.3e} > 1e-6, \
             width independence {indep:.3e} < 1e-6, {elapsed:.2}s < 120s",
            kurt.abs()
        ),
    );
}

#[test]
fn criterion_07_functional_suite() {
    let (bundle, _) = run("ultralocal-check.toml");
    let classified = bundle
        .checks
        .iter()
        .find(|c| c.name.contains("classifications match"))
        .expect("admissibility check present")
        .pass;
    let clauses = bundle
        .checks
        .iter()
        .filter(|c| c.name.contains("clause fires") || c.name.contains("irreducible"))
        .all(|c| c.pass);
    let refinement = bundle
        .checks
        .iter()
        .filter(|c| c.name.contains("refinement-stable"))
        .all(|c| c.pass);
    let psd = bundle
        .checks
        .iter()
        .find(|c| c.name.contains("positive semidefinite"))
        .expect("psd check present")
        .pass;
    let pass = classified && clauses && refinement && psd;
    report_line(
        "7 (general functional suite)",
        pass,
        &format!(
            "admissibility {classified}, reducibility clauses {clauses}, \
             refinement stability {refinement}, Gram PSD {psd} \
             (worst min eig {:.3e})",
            bundle.metrics["psd_worst_min_eig"]
        ),
    );
}

#[test]
fn criterion_08_superposition_identity() {
    let (bundle, _) = run("ultralocal-check.toml");
    let mc = bundle
        .checks
        .iter()
        .find(|c| c.name.contains("Monte Carlo"))
        .expect("mc check present")
        .pass;
    let reducible = bundle
        .checks
        .iter()
        .find(|c| c.name.contains("classifies as reducible"))
        .expect("reducibility check present")
        .pass;
    let pass = mc && reducible;
    report_line(
        "8 (superposition identity)",
        pass,
        &format!("closed form vs Monte Carlo within 3 sigma: {mc}; derived cd > 1 reducible: {reducible}"),
    );
}

#[test]
fn criterion_09_model_field_coefficient() {
    let (bundle, _) = run("ultralocal-check.toml");
    let dev = bundle.metrics["b_fit_worst_dev"];
    let pass = dev < 1e-9;
    report_line(
        "9 (model-field coefficient persistence)",
        pass,
        &format!("fitted b deviates from input by {dev:.3e} < 1e-9 across b in {{0.5, 1, 3}}"),
    );
}

#[test]
fn criterion_10_determinism() {
    let configs = [
        "classical-equiv.toml",
        "qm-equiv.toml",
        "free-field.toml",
        "free-field-signals.toml",
        "phi4.toml",
        "ultralocal-check.toml",
    ];
    let base = std::env::temp_dir().join(format!("acceptance_det_{}", std::process::id()));
    let mut identical = true;
    for name in configs {
        let cfg = load(name);
        let mut paths = Vec::new();
        for run_idx in 0..2 {
            let opts = RunOptions {
                out_dir: Some(base.join(name).join(run_idx.to_string())),
                ..Default::default()
            };
            let (_, written) = run_and_emit(&cfg, &opts).expect("run must complete");
            paths.push(written);
        }
        for (a, b) in paths[0].iter().zip(&paths[1]) {
            let ba = std::fs::read(a).unwrap();
            let bb = std::fs::read(b).unwrap();
            if ba != bb {
                identical = false;
                println!("criterion 10 detail: {name} differs between runs at {a:?}");
            }
        }
    }
    std::fs::remove_dir_all(&base).ok();
    report_line(
        "10 (determinism)",
        identical,
        "re-running every shipped config with its seed reproduces byte-identical reports",
    );
}
