use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gmnse_cli::config::DEFAULT_VERIFY_CONFIG;
use gmnse_cli::{run, CliError, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "gmnse", version, about = "Globally modified Navier-Stokes lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one orbit and write diagnostics, energy and snapshots.
    Simulate(Common),
    /// Property suite (uses the built-in config when --config is absent).
    Verify(Common),
    /// Absorbing-ball ensemble, union cloud and positive invariance.
    Attractor(Common),
    /// Weak-metric distance of tapered attractors to a reference.
    Semicontinuity(Common),
    /// Singular Gronwall envelope and its constant.
    Gronwall(Common),
    /// Early-time smoothing and time-derivative rates.
    Rates(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: `out` from the config, else `runs/<experiment>`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for ensemble fan-out (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(kind: ExperimentKind, args: &Common) -> Result<bool, CliError> {
    let cfg = match (&args.config, kind) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, ExperimentKind::Verify) => ExperimentConfig::parse(DEFAULT_VERIFY_CONFIG)?,
        (None, _) => return Err(CliError::Config("`--config`: required for this subcommand".into())),
    };
    if let Some(t) = args.threads {
        if t == 0 {
            return Err(CliError::Config("`--threads`: must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("`--threads`: {e}")))?;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("runs").join(kind.name()));
    let outcome = run(kind, &cfg, &out, args.seed)?;
    for c in &outcome.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("{tag} {} [{}]: {}", c.name, c.property, c.detail);
    }
    println!("manifest: {}", out.join(gmnse_cli::output::MANIFEST_NAME).display());
    Ok(outcome.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Simulate(a) => (ExperimentKind::Simulate, a),
        Command::Verify(a) => (ExperimentKind::Verify, a),
        Command::Attractor(a) => (ExperimentKind::Attractor, a),
        Command::Semicontinuity(a) => (ExperimentKind::Semicontinuity, a),
        Command::Gronwall(a) => (ExperimentKind::Gronwall, a),
        Command::Rates(a) => (ExperimentKind::Rates, a),
    };
    match execute(kind, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
