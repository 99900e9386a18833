//! Experiment configuration (TOML, format version 1).
//!
//! Every table rejects unknown keys. `taper_n = inf` selects the untapered
//! system. Sections not used by the chosen experiment may be omitted.

use std::path::{Path, PathBuf};

use gmnse::rhs::{Forcing, ForcingEntry, SimParams, DEFAULT_CFL};
use gmnse::Grid;
use serde::Deserialize;

use crate::error::CliError;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Simulate,
    Verify,
    Attractor,
    Semicontinuity,
    Gronwall,
    Rates,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Verify => "verify",
            ExperimentKind::Attractor => "attractor",
            ExperimentKind::Semicontinuity => "semicontinuity",
            ExperimentKind::Gronwall => "gronwall",
            ExperimentKind::Rates => "rates",
        }
    }

    pub fn is_randomized(self) -> bool {
        !matches!(self, ExperimentKind::Gronwall)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub experiment: Option<ExperimentKind>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub sim: Option<SimConfig>,
    pub initial: Option<InitialConfig>,
    pub ensemble: Option<EnsembleConfig>,
    pub schedule: Option<ScheduleConfig>,
    pub gronwall: Option<GronwallConfig>,
    pub rates: Option<RatesConfig>,
    pub verify: Option<VerifyConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n: usize,
    pub nu: f64,
    #[serde(default = "infinity")]
    pub taper_n: f64,
    pub dt: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub forcing: Vec<ForcingEntry>,
}

fn infinity() -> f64 {
    f64::INFINITY
}

fn default_cfl() -> f64 {
    DEFAULT_CFL
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialKind {
    Zero,
    /// `(A sin x₂, 0, 0)` with `‖u‖_H = radius`.
    Shear,
    Smooth,
    Rough,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub kind: InitialKind,
    #[serde(default = "one")]
    pub radius: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub count: usize,
    pub seed: Option<u64>,
    /// Initial data are drawn in `factor · B₀`.
    #[serde(default = "one")]
    pub factor: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub t_end: Option<f64>,
    pub stride: Option<usize>,
    #[serde(rename = "N_list", default)]
    pub n_list: Vec<f64>,
    #[serde(default)]
    pub t_list: Vec<f64>,
    pub spacing: Option<f64>,
    pub t_transient: Option<f64>,
    pub per_orbit: Option<usize>,
    /// Reference cloud budget for `semicontinuity`.
    #[serde(rename = "reference_N")]
    pub reference_n: Option<f64>,
    pub reference_t: Option<f64>,
    /// Evolution time for the positive-invariance check.
    pub tau: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GronwallConfig {
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    #[serde(default)]
    pub a_values: Vec<f64>,
    #[serde(default)]
    pub b_values: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    #[serde(default = "default_thetas")]
    pub theta: Vec<f64>,
    #[serde(default = "default_eta")]
    pub eta: f64,
    pub t_end: f64,
}

fn default_thetas() -> Vec<f64> {
    vec![0.125, 0.25, 0.375]
}

fn default_eta() -> f64 {
    0.1
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub taper_samples: usize,
    pub tensor_pairs: usize,
    pub tensor_n: usize,
    pub identity_pairs: usize,
    pub identity_n: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_semicontinuity_rel")]
    pub semicontinuity_rel: f64,
    #[serde(default = "default_semicontinuity_floor")]
    pub semicontinuity_floor: f64,
    #[serde(default = "default_lp_refinement")]
    pub lp_refinement: f64,
    #[serde(default = "default_energy_ratio")]
    pub energy_ratio: f64,
}

fn default_semicontinuity_rel() -> f64 {
    0.1
}

fn default_semicontinuity_floor() -> f64 {
    1e-6
}

fn default_lp_refinement() -> f64 {
    0.05
}

fn default_energy_ratio() -> f64 {
    3.5
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            semicontinuity_rel: default_semicontinuity_rel(),
            semicontinuity_floor: default_semicontinuity_floor(),
            lp_refinement: default_lp_refinement(),
            energy_ratio: default_energy_ratio(),
        }
    }
}

/// Built-in configuration used by `verify` when no `--config` is given.
pub const DEFAULT_VERIFY_CONFIG: &str = include_str!("../../../configs/verify.toml");

fn config_err(key: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("`{key}`: {reason}"))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.version != CONFIG_VERSION {
            return Err(config_err("version", format!("expected {CONFIG_VERSION}, got {}", self.version)));
        }
        let t = &self.tolerances;
        for (key, v) in [
            ("tolerances.semicontinuity_rel", t.semicontinuity_rel),
            ("tolerances.semicontinuity_floor", t.semicontinuity_floor),
            ("tolerances.lp_refinement", t.lp_refinement),
            ("tolerances.energy_ratio", t.energy_ratio),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config_err(key, format!("must be positive, got {v}")));
            }
        }
        if let Some(sim) = &self.sim {
            self.sim_params(sim)?;
        }
        if let Some(i) = &self.initial {
            if !(i.radius >= 0.0 && i.radius.is_finite()) {
                return Err(config_err("initial.radius", "must be nonnegative"));
            }
        }
        if let Some(e) = &self.ensemble {
            if e.count == 0 {
                return Err(config_err("ensemble.count", "must be at least 1"));
            }
            if !(e.factor > 0.0) {
                return Err(config_err("ensemble.factor", "must be positive"));
            }
        }
        if let Some(s) = &self.schedule {
            if s.stride == Some(0) {
                return Err(config_err("schedule.stride", "must be at least 1"));
            }
            for (key, v) in [
                ("schedule.t_end", s.t_end),
                ("schedule.spacing", s.spacing),
                ("schedule.tau", s.tau),
                ("schedule.t_transient", s.t_transient),
            ] {
                if let Some(v) = v {
                    if !(v > 0.0) {
                        return Err(config_err(key, format!("must be positive, got {v}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Section `name` or a config error naming it.
    pub fn require<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        section.as_ref().ok_or_else(|| config_err(name, "section is required for this experiment"))
    }

    pub fn sim_params(&self, sim: &SimConfig) -> Result<SimParams, CliError> {
        let grid = Grid::new(sim.n).map_err(|e| config_err("sim.n", e))?;
        let forcing = Forcing::from_entries(&grid, &sim.forcing).map_err(|e| config_err("sim.forcing", e))?;
        let mut p = SimParams::new(&grid, sim.nu, sim.taper_n, forcing, sim.dt)
            .map_err(|e| CliError::Config(format!("sim.{e}")))?;
        p.cfl = sim.cfl;
        p.validate().map_err(|e| CliError::Config(format!("sim.{e}")))?;
        Ok(p)
    }

    pub fn params(&self) -> Result<SimParams, CliError> {
        self.sim_params(Self::require(&self.sim, "sim")?)
    }

    /// Effective seed: the command line wins over `ensemble.seed`, which
    /// wins over the top-level `seed`.
    pub fn effective_seed(&self, cli_seed: Option<u64>) -> Option<u64> {
        cli_seed
            .or(self.ensemble.as_ref().and_then(|e| e.seed))
            .or(self.seed)
    }
}
