use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{fractional_norm, leray_project, Grid, SpectralField};

/// One forcing mode as it appears in configuration files: the real field
/// `c e^{ik·x} + c.c.` with `c = re + i·im`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingEntry {
    pub k: [i32; 3],
    pub re: [f64; 3],
    pub im: [f64; 3],
}

/// Divergence-free trigonometric-polynomial body force and its cached dual
/// (`H_{-1/2}`) norm.
#[derive(Clone, Debug)]
pub struct Forcing {
    field: SpectralField,
    norm_hm12: f64,
}

impl Forcing {
    pub fn zero(grid: &Arc<Grid>) -> Self {
        Forcing {
            field: SpectralField::zeros(grid),
            norm_hm12: 0.0,
        }
    }

    /// Symmetrizes, projects and validates configuration entries.
    pub fn from_entries(grid: &Arc<Grid>, entries: &[ForcingEntry]) -> Result<Self> {
        let mut modes = Vec::with_capacity(entries.len());
        for e in entries {
            if e.re.iter().chain(&e.im).any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "forcing",
                    reason: format!("non-finite coefficient at k = {:?}", e.k),
                });
            }
            let c = [0, 1, 2].map(|d| Complex64::new(e.re[d], e.im[d]));
            modes.push((e.k, c));
        }
        let raw = SpectralField::from_modes(grid, &modes).map_err(|err| Error::InvalidParameter {
            name: "forcing",
            reason: err.to_string(),
        })?;
        Ok(Self::from_field(&raw))
    }

    /// Uses `P f` for an arbitrary real field `f`.
    pub fn from_field(f: &SpectralField) -> Self {
        let field = leray_project(f);
        let norm_hm12 = fractional_norm(&field, -0.5);
        Forcing { field, norm_hm12 }
    }

    pub fn field(&self) -> &SpectralField {
        &self.field
    }

    /// `‖f‖_{H_{-1/2}}`.
    pub fn norm_hm12(&self) -> f64 {
        self.norm_hm12
    }

    pub fn is_zero(&self) -> bool {
        self.field.is_zero()
    }
}

/// Physical and numerical parameters of one run.
#[derive(Clone, Debug)]
pub struct SimParams {
    /// Kinematic viscosity.
    pub nu: f64,
    /// Taper threshold `N`; `f64::INFINITY` gives the plain Galerkin
    /// Navier-Stokes system, `0` the Stokes system.
    pub taper_n: f64,
    pub forcing: Forcing,
    pub grid: Arc<Grid>,
    pub dt: f64,
    /// Advective bound `dt ≤ cfl · Δx / max|u|`.
    pub cfl: f64,
}

pub const DEFAULT_CFL: f64 = 1.0;

impl SimParams {
    pub fn new(grid: &Arc<Grid>, nu: f64, taper_n: f64, forcing: Forcing, dt: f64) -> Result<Self> {
        let p = SimParams {
            nu,
            taper_n,
            forcing,
            grid: Arc::clone(grid),
            dt,
            cfl: DEFAULT_CFL,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "nu",
                reason: format!("must be positive and finite, got {}", self.nu),
            });
        }
        if !(self.taper_n >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "taper_n",
                reason: format!("must be nonnegative, got {}", self.taper_n),
            });
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("must be positive and finite, got {}", self.dt),
            });
        }
        if !(self.cfl > 0.0) {
            return Err(Error::InvalidParameter {
                name: "cfl",
                reason: format!("must be positive, got {}", self.cfl),
            });
        }
        if self.forcing.field().grid().n() != self.grid.n() {
            return Err(Error::GridMismatch(self.grid.n(), self.forcing.field().grid().n()));
        }
        Ok(())
    }

    pub fn with_taper(&self, taper_n: f64) -> Self {
        SimParams {
            taper_n,
            ..self.clone()
        }
    }

    pub fn with_dt(&self, dt: f64) -> Self {
        SimParams { dt, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forcing_entries_are_projected() {
        let g = Grid::new(8).unwrap();
        let f = Forcing::from_entries(
            &g,
            &[ForcingEntry {
                k: [1, 0, 0],
                re: [1.0, 1.0, 0.0],
                im: [0.0, 0.0, 0.0],
            }],
        )
        .unwrap();
        assert!(f.field().is_hermitian());
        assert_eq!(f.field().coeff([1, 0, 0])[0], Complex64::new(0.0, 0.0));
        // |k| = 1: dual norm equals the H norm
        assert!((f.norm_hm12() - fractional_norm(f.field(), 0.0)).abs() < 1e-15);
    }

    #[test]
    fn forcing_rejects_mean_and_unresolved_modes() {
        let g = Grid::new(8).unwrap();
        let bad = |k| ForcingEntry { k, re: [0.0, 1.0, 0.0], im: [0.0; 3] };
        assert!(Forcing::from_entries(&g, &[bad([0, 0, 0])]).is_err());
        assert!(Forcing::from_entries(&g, &[bad([5, 0, 0])]).is_err());
    }

    #[test]
    fn params_validation_names_the_key() {
        let g = Grid::new(8).unwrap();
        let err = SimParams::new(&g, -1.0, 1.0, Forcing::zero(&g), 0.01).unwrap_err();
        assert!(err.to_string().contains("`nu`"));
        assert!(SimParams::new(&g, 1.0, -1.0, Forcing::zero(&g), 0.01).is_err());
        assert!(SimParams::new(&g, 1.0, f64::INFINITY, Forcing::zero(&g), 0.01).is_ok());
        assert!(SimParams::new(&g, 1.0, 1.0, Forcing::zero(&g), 0.0).is_err());
    }
}
