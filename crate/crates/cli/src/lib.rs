//! Config-driven runner for the experiments in the `gmnse` crate. Each run
//! writes its artifacts plus a hashed manifest into one directory.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::Path;

use serde::Serialize;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::CliError;
pub use experiments::Check;
pub use output::{Manifest, RunWriter};

pub const REPORT_NAME: &str = "report.json";

#[derive(Debug, Serialize)]
struct Report<'a> {
    experiment: &'static str,
    seed: Option<u64>,
    passed: bool,
    checks: &'a [Check],
}

#[derive(Debug)]
pub struct RunOutcome {
    pub checks: Vec<Check>,
    pub manifest: Manifest,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn needs_seed(kind: ExperimentKind, cfg: &ExperimentConfig) -> bool {
    use config::InitialKind;
    match kind {
        ExperimentKind::Simulate => cfg
            .initial
            .as_ref()
            .is_some_and(|i| matches!(i.kind, InitialKind::Smooth | InitialKind::Rough)),
        other => other.is_randomized(),
    }
}

/// Runs `kind` with `cfg` into `out`. A mismatching `experiment` field in
/// the config is a config error.
pub fn run(kind: ExperimentKind, cfg: &ExperimentConfig, out: &Path, cli_seed: Option<u64>) -> Result<RunOutcome, CliError> {
    if let Some(declared) = cfg.experiment {
        if declared != kind {
            return Err(CliError::Config(format!(
                "`experiment`: config declares `{}` but `{}` was requested",
                declared.name(),
                kind.name()
            )));
        }
    }
    let seed = cfg.effective_seed(cli_seed);
    if seed.is_none() && needs_seed(kind, cfg) {
        return Err(CliError::Config(format!("`seed`: required for `{}` (config or --seed)", kind.name())));
    }
    let mut w = RunWriter::create(out)?;
    let checks = match kind {
        ExperimentKind::Simulate => experiments::simulate(cfg, seed, &mut w)?,
        ExperimentKind::Verify => experiments::verify(cfg, seed, &mut w)?,
        ExperimentKind::Attractor => experiments::attractor(cfg, seed, &mut w)?,
        ExperimentKind::Semicontinuity => experiments::semicontinuity(cfg, seed, &mut w)?,
        ExperimentKind::Gronwall => experiments::gronwall(cfg, &mut w)?,
        ExperimentKind::Rates => experiments::rates(cfg, seed, &mut w)?,
    };
    let passed = checks.iter().all(|c| c.passed);
    w.write_json(REPORT_NAME, "report", &Report { experiment: kind.name(), seed, passed, checks: &checks })?;
    let manifest = w.finish()?;
    Ok(RunOutcome { checks, manifest })
}
