use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{integrate, Trajectory};
use crate::rhs::SimParams;
use crate::spectral::SpectralField;

/// `V(t) = ½‖u(t)‖² + ν ∫₀ᵗ ‖u‖²_V - ∫₀ᵗ (u, f)` on the diagnostic grid,
/// integrals by the trapezoid rule.
pub fn energy_functional(traj: &Trajectory) -> Result<Vec<(f64, f64)>> {
    let d = &traj.diagnostics;
    if d.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: d.len() });
    }
    let nu = traj.params.nu;
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(d.len());
    out.push((d[0].t, 0.5 * d[0].norm_h * d[0].norm_h));
    for w in d.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let h = b.t - a.t;
        acc += 0.5 * h * (nu * (a.norm_v * a.norm_v + b.norm_v * b.norm_v) - (a.work + b.work));
        out.push((b.t, 0.5 * b.norm_h * b.norm_h + acc));
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyReport {
    pub tol_v: f64,
    /// `max_{s ≤ t} V(t) - V(s)`.
    pub max_increase: f64,
    /// `max_{s, t} |V(t) - V(s)|`.
    pub max_drift: f64,
    pub inequality_holds: bool,
    pub equality_holds: bool,
}

impl EnergyReport {
    pub fn passed(&self) -> bool {
        self.inequality_holds && self.equality_holds
    }
}

/// Checks `V(t) ≤ V(s) + tol_v` for all `s ≤ t`, and `|V(t) - V(s)| ≤ tol_v`.
pub fn energy_inequality_check(traj: &Trajectory, tol_v: f64) -> Result<EnergyReport> {
    if !(tol_v >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol_v",
            reason: format!("must be nonnegative, got {tol_v}"),
        });
    }
    let v = energy_functional(traj)?;
    let mut running_min = f64::INFINITY;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut max_increase = 0.0f64;
    for &(_, x) in &v {
        running_min = running_min.min(x);
        max_increase = max_increase.max(x - running_min);
        lo = lo.min(x);
        hi = hi.max(x);
    }
    let max_drift = hi - lo;
    Ok(EnergyReport {
        tol_v,
        max_increase,
        max_drift,
        inequality_holds: max_increase <= tol_v,
        equality_holds: max_drift <= tol_v,
    })
}

/// Tolerance `tol_V = C dt²` calibrated on a coarse run and re-checked on
/// a run with half the step.
#[derive(Clone, Debug, Serialize)]
pub struct EnergyCalibration {
    pub dt: f64,
    /// `C` in `tol_V = C dt²`.
    pub constant: f64,
    pub coarse: EnergyReport,
    pub fine: EnergyReport,
    /// `drift(dt) / drift(dt/2)`.
    pub drift_ratio: f64,
}

impl EnergyCalibration {
    pub fn passed(&self, min_ratio: f64) -> bool {
        self.coarse.passed() && self.fine.passed() && self.drift_ratio >= min_ratio
    }
}

/// Safety factor between the coarse drift and the calibrated tolerance.
pub const ENERGY_TOL_SAFETY: f64 = 1.5;

pub fn calibrate_energy_tolerance(u0: &SpectralField, p: &SimParams, t_end: f64) -> Result<EnergyCalibration> {
    let coarse_traj = integrate(u0, p, t_end, usize::MAX)?;
    let fine_traj = integrate(u0, &p.with_dt(p.dt / 2.0), t_end, usize::MAX)?;
    let drift = |t: &Trajectory| energy_inequality_check(t, 0.0).map(|r| r.max_drift);
    let (dc, df) = (drift(&coarse_traj)?, drift(&fine_traj)?);
    let constant = ENERGY_TOL_SAFETY * dc / (p.dt * p.dt);
    let coarse = energy_inequality_check(&coarse_traj, constant * p.dt * p.dt)?;
    let fine = energy_inequality_check(&fine_traj, constant * p.dt * p.dt / 4.0)?;
    Ok(EnergyCalibration {
        dt: p.dt,
        constant,
        coarse,
        fine,
        drift_ratio: if df > 0.0 { dc / df } else { f64::INFINITY },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rhs::{Forcing, ForcingEntry};
    use crate::spectral::random::{member_rng, smooth_field};
    use crate::spectral::Grid;
    use num_complex::Complex64;

    #[test]
    fn stokes_mode_drift_is_second_order() {
        // V drift for a single decaying mode is the trapezoid error of
        // ∫ 2ν a² e^{-2νt}, computable in closed form.
        let g = Grid::new(8).unwrap();
        let nu = 0.5;
        let u0 = SpectralField::from_modes(
            &g,
            &[([0, 1, 0], [Complex64::new(0.0, -0.5), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)])],
        )
        .unwrap();
        let mut drifts = Vec::new();
        for dt in [0.1, 0.05] {
            let p = SimParams::new(&g, nu, 0.0, Forcing::zero(&g), dt).unwrap();
            let traj = integrate(&u0, &p, 2.0, usize::MAX).unwrap();
            let v = energy_functional(&traj).unwrap();
            let e0 = v[0].1;
            // trapezoid overestimates ∫ e^{-2νt}: per-step factor (h/2)coth(νh)·2ν... exact form
            let x = nu * dt;
            let per = (x / x.tanh()) - 1.0; // relative trapezoid error of exponential decay
            let (t_end, v_end) = *v.last().unwrap();
            let expect = e0 * (1.0 - (-2.0 * nu * t_end).exp()) * per;
            assert!(((v_end - e0) - expect).abs() <= 1e-10 * expect, "{} vs {}", v_end - e0, expect);
            drifts.push(energy_inequality_check(&traj, 0.0).unwrap().max_drift);
        }
        assert!((drifts[0] / drifts[1] - 4.0).abs() < 0.05);
    }

    #[test]
    fn forced_run_calibrates() {
        let g = Grid::new(12).unwrap();
        let f = Forcing::from_entries(&g, &[ForcingEntry { k: [1, 1, 0], re: [0.0, 0.0, 1.0], im: [0.0; 3] }]).unwrap();
        let p = SimParams::new(&g, 0.5, 1.5, f, 0.1).unwrap();
        let u0 = smooth_field(&g, &mut member_rng(3, 0), 1.0);
        let c = calibrate_energy_tolerance(&u0, &p, 3.0).unwrap();
        assert!(c.passed(3.5), "{c:?}");
    }

    #[test]
    fn negative_tolerance_rejected() {
        let g = Grid::new(8).unwrap();
        let p = SimParams::new(&g, 1.0, 1.0, Forcing::zero(&g), 0.1).unwrap();
        let traj = integrate(&SpectralField::zeros(&g), &p, 0.5, 1).unwrap();
        assert!(energy_inequality_check(&traj, -1.0).is_err());
        let r = energy_inequality_check(&traj, 0.0).unwrap();
        assert!(r.passed());
    }
}
