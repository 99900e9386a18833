use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{step_count, Stepper};
use crate::rhs::SimParams;
use crate::spectral::{fractional_norm, SpectralField};

#[derive(Clone, Debug, Serialize)]
pub struct AgreementRow {
    pub n: f64,
    /// `‖u_N - u_∞‖_{L²(0,T;H)}`, trapezoid over the steps.
    pub l2_distance: f64,
    pub identical: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AgreementReport {
    /// Least grid `N` whose orbit is bit-identical to the `N = ∞` orbit;
    /// `f64::INFINITY` if there is none.
    pub threshold: f64,
    /// `sup_t ‖u_∞(t)‖_{L⁴}` over the step states.
    pub sup_l4: f64,
    pub rows: Vec<AgreementRow>,
}

impl AgreementReport {
    /// Distances below the threshold are nonincreasing in `N`.
    pub fn distances_nonincreasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].l2_distance <= w[0].l2_distance * (1.0 + 1e-12))
    }

    /// Whether the threshold sits within one grid position of the least
    /// grid value at or above `sup_l4`.
    pub fn within_one_step(&self, grid: &[f64]) -> bool {
        let Some(i) = grid.iter().position(|&n| n == self.threshold) else {
            return false;
        };
        let j = grid.iter().position(|&n| n >= self.sup_l4).unwrap_or(grid.len());
        i.abs_diff(j) <= 1
    }
}

/// Compares orbits from `u0` for each `N` in `n_grid` with the untapered
/// orbit over `[0, t_end]`.
pub fn nse_agreement_threshold(u0: &SpectralField, p: &SimParams, n_grid: &[f64], t_end: f64) -> Result<AgreementReport> {
    if n_grid.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    if n_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter {
            name: "N_grid",
            reason: "must be strictly increasing".into(),
        });
    }
    let steps = step_count(t_end, p.dt);
    let reference_stepper = Stepper::new(&p.with_taper(f64::INFINITY))?;
    let mut reference = Vec::with_capacity(steps + 1);
    let mut sup_l4: f64 = 0.0;
    let mut u = u0.clone();
    for _ in 0..steps {
        let (next, d) = reference_stepper.advance(&u)?;
        sup_l4 = sup_l4.max(d.norm_l4);
        reference.push(u);
        u = next;
    }
    sup_l4 = sup_l4.max(reference_stepper.diagnose(&u).norm_l4);
    reference.push(u);

    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let stepper = Stepper::new(&p.with_taper(n))?;
        let mut u = u0.clone();
        let mut identical = true;
        let mut prev = 0.0;
        let mut acc = 0.0;
        for i in 1..=steps {
            u = stepper.advance(&u)?.0;
            identical &= u.bit_eq(&reference[i]);
            let d2 = fractional_norm(&(&u - &reference[i]), 0.0).powi(2);
            acc += 0.5 * p.dt * (prev + d2);
            prev = d2;
        }
        rows.push(AgreementRow { n, l2_distance: acc.sqrt(), identical });
    }
    let threshold = rows.iter().find(|r| r.identical).map_or(f64::INFINITY, |r| r.n);
    Ok(AgreementReport { threshold, sup_l4, rows })
}
