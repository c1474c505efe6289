//! Experiment runner: one subcommand per demonstration, driven by a TOML
//! config, emitting machine-readable reports.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails,
//! 2 on config/validation errors, 3 on numerical failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use recenter::config::{load_config, ExperimentKind};
use recenter::experiments::{run_and_emit, RunOptions};
use recenter::report::ReportFormat;
use recenter::Error;

#[derive(Parser)]
#[command(
    name = "recenter",
    version,
    about = "Coherent-state kernel experiments: constraint regularization and kernel recentering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for reports (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override for label generation and Monte Carlo sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Report format: csv (summary + CSV tables) or json (all-in-one).
    #[arg(long, default_value = "csv")]
    format: String,
    /// Worker threads for per-mode and per-grid-point parallelism.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Classical check: multiplier dynamics reproduces Hamiltonian dynamics.
    #[command(name = "classical-equiv")]
    ClassicalEquiv(RunArgs),
    /// One-dof check: constraint-regularized kernel equals the propagator.
    #[command(name = "qm-equiv")]
    QmEquiv(RunArgs),
    /// Free-field recovery, width erasure, and incompatibility signals.
    #[command(name = "free-field")]
    FreeField(RunArgs),
    /// Quartic chain: iterative ground state and recentered kernel.
    #[command(name = "phi4")]
    Phi4(RunArgs),
    /// General ultralocal functionals: admissibility, classification,
    /// superposition, model fields.
    #[command(name = "ultralocal-check")]
    UltralocalCheck(RunArgs),
}

impl Command {
    fn expected_kind(&self) -> ExperimentKind {
        match self {
            Command::ClassicalEquiv(_) => ExperimentKind::ClassicalEquiv,
            Command::QmEquiv(_) => ExperimentKind::QmEquiv,
            Command::FreeField(_) => ExperimentKind::FreeField,
            Command::Phi4(_) => ExperimentKind::Phi4,
            Command::UltralocalCheck(_) => ExperimentKind::UltralocalCheck,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::ClassicalEquiv(a)
            | Command::QmEquiv(a)
            | Command::FreeField(a)
            | Command::Phi4(a)
            | Command::UltralocalCheck(a) => a,
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config { .. } | Error::InvalidInput(_) => 2,
        _ => 3,
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    let expected = cli.command.expected_kind();
    let args = cli.command.args();
    let cfg = load_config(&args.config)?;
    if cfg.experiment != expected {
        return Err(Error::config(
            "experiment",
            format!(
                "config is for `{}` but the `{}` subcommand was invoked",
                cfg.experiment.name(),
                expected.name()
            ),
        ));
    }
    let format: ReportFormat = args.format.parse()?;
    let opts = RunOptions {
        seed_override: args.seed,
        out_dir: args.out.clone(),
        format,
        jobs: args.jobs,
    };
    let (bundle, written) = run_and_emit(&cfg, &opts)?;
    for check in &bundle.checks {
        let status = if check.pass { "PASS" } else { "FAIL" };
        if check.upper_bound {
            println!(
                "[{status}] {} (value {:.3e}, threshold {:.3e})",
                check.name, check.value, check.threshold
            );
        } else {
            println!("[{status}] {}", check.name);
        }
    }
    for path in &written {
        println!("wrote {}", path.display());
    }
    Ok(bundle.all_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
