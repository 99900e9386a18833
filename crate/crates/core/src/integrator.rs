//! Integrating-factor RK4 for the Galerkin system.
//!
//! The Stokes part `-ν|k|²` is integrated exactly through the factors
//! `e^{-ν|k|² dt}` and `e^{-ν|k|² dt/2}`; the modified convection and the
//! forcing go through classical RK4 in the integrating-factor variables.
//! The taper factor `F_N` is re-evaluated from the stage state at every
//! right-hand-side evaluation.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rhs::{evaluate, SimParams};
use crate::spectral::{fractional_norm, inner_product, leray_project, SpectralField};

/// Scalar diagnostics of one state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub t: f64,
    pub norm_h: f64,
    pub norm_v: f64,
    pub norm_l4: f64,
    pub norm_h38: f64,
    /// `F_N(u)`.
    pub factor: f64,
    /// `(u, f)`.
    pub work: f64,
    pub max_speed: f64,
}

pub const DIAGNOSTICS_HEADER: &str = "t,norm_H,norm_V,norm_L4,norm_H38,FN";

/// Orbit `t ↦ S_N(t) u₀` sampled every `stride` steps, with diagnostics at
/// every step.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub params: SimParams,
    pub stride: usize,
    /// Snapshot times, `i · stride · dt`.
    pub times: Vec<f64>,
    pub snapshots: Vec<SpectralField>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Trajectory {
    pub fn sample_spacing(&self) -> f64 {
        self.params.dt * self.stride as f64
    }

    pub fn last(&self) -> &SpectralField {
        self.snapshots.last().expect("trajectory holds the initial state")
    }

    /// `sup_t ‖u(t)‖_{L⁴}` over the diagnostic samples.
    pub fn sup_l4(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.norm_l4).fold(0.0, f64::max)
    }

    /// Diagnostics as CSV with header [`DIAGNOSTICS_HEADER`].
    pub fn write_diagnostics_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{DIAGNOSTICS_HEADER}")?;
        for d in &self.diagnostics {
            writeln!(w, "{},{},{},{},{},{}", d.t, d.norm_h, d.norm_v, d.norm_l4, d.norm_h38, d.factor)?;
        }
        Ok(())
    }
}

/// File name of snapshot `step` of run `run_id`.
pub fn snapshot_file_name(run_id: &str, step: usize) -> String {
    format!("snap_{run_id}_{step:09}.fld")
}

/// Precomputed exponential factors for a fixed `(ν, dt)`.
pub struct Stepper {
    params: SimParams,
    full: Vec<f64>,
    half: Vec<f64>,
}

impl Stepper {
    pub fn new(params: &SimParams) -> Result<Self> {
        params.validate()?;
        let (nu, dt) = (params.nu, params.dt);
        let full = params.grid.k2().iter().map(|k2| (-nu * k2 * dt).exp()).collect();
        let half = params.grid.k2().iter().map(|k2| (-nu * k2 * dt / 2.0).exp()).collect();
        Ok(Stepper {
            params: params.clone(),
            full,
            half,
        })
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    /// Advances one step and returns the diagnostics of the *input* state
    /// (with `t = 0`; the caller stamps the time).
    pub fn advance(&self, u: &SpectralField) -> Result<(SpectralField, Diagnostic)> {
        let p = &self.params;
        let h = p.dt;
        let a = evaluate(u, p);
        let dx = 2.0 * std::f64::consts::PI / p.grid.n() as f64;
        if a.max_speed > 0.0 {
            let limit = p.cfl * dx / a.max_speed;
            if h > limit {
                return Err(Error::Cfl { dt: h, limit, max_u: a.max_speed });
            }
        }
        let diag = self.diagnose_with(u, a.l4, a.factor, a.max_speed);

        let (e1, e2) = (&self.full, &self.half);
        let eu = u.scale_modes(e1);

        let mut stage = u.clone();
        stage.axpy(h / 2.0, &a.explicit);
        let ua = stage.scale_modes(e2);
        let b = evaluate(&ua, p).explicit;

        let mut ub = u.scale_modes(e2);
        ub.axpy(h / 2.0, &b);
        let c = evaluate(&ub, p).explicit;

        let mut uc = eu.clone();
        uc.axpy(h, &c.scale_modes(e2));
        let d = evaluate(&uc, p).explicit;

        let mut bc = &b + &c;
        bc = bc.scale_modes(e2);
        let mut incr = a.explicit.scale_modes(e1);
        incr.axpy(2.0, &bc);
        incr.axpy(1.0, &d);
        let mut next = eu;
        next.axpy(h / 6.0, &incr);
        Ok((leray_project(&next), diag))
    }

    fn diagnose_with(&self, u: &SpectralField, l4: f64, factor: f64, max_speed: f64) -> Diagnostic {
        Diagnostic {
            t: 0.0,
            norm_h: fractional_norm(u, 0.0),
            norm_v: fractional_norm(u, 0.5),
            norm_l4: l4,
            norm_h38: fractional_norm(u, 0.375),
            factor,
            work: inner_product(u, self.params.forcing.field()).unwrap_or(0.0),
            max_speed,
        }
    }

    /// Diagnostics of an arbitrary state.
    pub fn diagnose(&self, u: &SpectralField) -> Diagnostic {
        let phys = crate::spectral::to_physical(u);
        let l4 = phys.l4_norm();
        let factor = crate::rhs::taper(l4, self.params.taper_n).expect("validated parameters");
        self.diagnose_with(u, l4, factor, phys.max_speed())
    }
}

/// One integrating-factor RK4 step.
pub fn step(u: &SpectralField, p: &SimParams) -> Result<SpectralField> {
    Stepper::new(p)?.advance(u).map(|(next, _)| next)
}

/// Number of steps covering `t_end` at step `dt`.
pub fn step_count(t_end: f64, dt: f64) -> usize {
    (t_end / dt).round().max(1.0) as usize
}

/// Integrates from `u0` over `[0, t_end]`, keeping every `stride`-th state.
pub fn integrate(u0: &SpectralField, p: &SimParams, t_end: f64, stride: usize) -> Result<Trajectory> {
    if !(t_end > 0.0) {
        return Err(Error::InvalidParameter {
            name: "t_end",
            reason: format!("must be positive, got {t_end}"),
        });
    }
    if stride == 0 {
        return Err(Error::InvalidParameter {
            name: "stride",
            reason: "must be at least 1".into(),
        });
    }
    u0.same_grid(p.forcing.field())?;
    let stepper = Stepper::new(p)?;
    let steps = step_count(t_end, p.dt);
    let mut traj = Trajectory {
        params: p.clone(),
        stride,
        times: vec![0.0],
        snapshots: vec![u0.clone()],
        diagnostics: Vec::with_capacity(steps + 1),
    };
    let mut u = u0.clone();
    for i in 0..steps {
        let (next, mut diag) = stepper.advance(&u)?;
        diag.t = i as f64 * p.dt;
        traj.diagnostics.push(diag);
        u = next;
        if (i + 1) % stride == 0 {
            traj.times.push((i + 1) as f64 * p.dt);
            traj.snapshots.push(u.clone());
        }
    }
    let mut last = stepper.diagnose(&u);
    last.t = steps as f64 * p.dt;
    traj.diagnostics.push(last);
    Ok(traj)
}

/// `S_N(t) u0` without recording anything; returns the state after
/// `step_count(t, dt)` steps.
pub fn evolve(u0: &SpectralField, p: &SimParams, t: f64) -> Result<SpectralField> {
    u0.same_grid(p.forcing.field())?;
    let stepper = Stepper::new(p)?;
    let mut u = u0.clone();
    if t <= 0.0 {
        return Ok(u);
    }
    for _ in 0..step_count(t, p.dt) {
        u = stepper.advance(&u)?.0;
    }
    Ok(u)
}

/// Per-interval residual of the energy equality
///
/// ```text
/// ½‖u(t_{n+1})‖² - ½‖u(t_n)‖² + ν ∫ ‖u‖²_V - ∫ (u, f)
/// ```
///
/// with trapezoid quadrature in time. Needs `stride = 1`.
pub fn energy_budget(traj: &Trajectory) -> Result<Vec<f64>> {
    if traj.stride != 1 {
        return Err(Error::InvalidParameter {
            name: "stride",
            reason: format!("energy budget needs every step, got stride {}", traj.stride),
        });
    }
    let (nu, dt) = (traj.params.nu, traj.params.dt);
    Ok(traj
        .diagnostics
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            0.5 * (b.norm_h * b.norm_h - a.norm_h * a.norm_h)
                + nu * dt * 0.5 * (a.norm_v * a.norm_v + b.norm_v * b.norm_v)
                - dt * 0.5 * (a.work + b.work)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rhs::Forcing;
    use crate::spectral::random::{member_rng, smooth_field};
    use crate::spectral::{norm_h, Grid};
    use num_complex::Complex64;
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn shear(g: &Arc<Grid>) -> SpectralField {
        SpectralField::from_modes(g, &[([0, 1, 0], [c(0.0, -0.5), c(0.0, 0.0), c(0.0, 0.0)])]).unwrap()
    }

    #[test]
    fn shear_decays_exactly() {
        let g = Grid::new(8).unwrap();
        let p = SimParams::new(&g, 0.9, f64::INFINITY, Forcing::zero(&g), 0.05).unwrap();
        let u = shear(&g);
        let next = step(&u, &p).unwrap();
        let expect = (-0.9f64 * 0.05).exp();
        let ratio = next.coeff([0, 1, 0])[0].im / u.coeff([0, 1, 0])[0].im;
        assert!((ratio - expect).abs() <= 2e-16, "{ratio} {expect}");
    }

    #[test]
    fn forced_linear_response() {
        // u = 0, single forcing mode: exact response (1 - e^{-ν|k|²dt}) / (ν|k|²) P f
        let g = Grid::new(8).unwrap();
        let k0 = [1, 1, 0];
        let f = Forcing::from_entries(
            &g,
            &[crate::rhs::ForcingEntry { k: k0, re: [0.0, 0.0, 1.0], im: [0.0, 0.0, 0.0] }],
        )
        .unwrap();
        let nu = 0.7;
        let k2 = 2.0;
        let mut errs = Vec::new();
        for dt in [0.2, 0.1] {
            let p = SimParams::new(&g, nu, 0.0, f.clone(), dt).unwrap();
            let out = step(&SpectralField::zeros(&g), &p).unwrap();
            let exact = (1.0 - (-nu * k2 * dt).exp()) / (nu * k2);
            errs.push((out.coeff(k0)[2].re - exact).abs());
        }
        // local error O(dt^5)
        assert!(errs[0] / errs[1] > 25.0, "{errs:?}");
        assert!(errs[0] < 1e-5);
    }

    #[test]
    fn cfl_violation_reports_speed() {
        let g = Grid::new(8).unwrap();
        let mut rng = member_rng(1, 0);
        let u = smooth_field(&g, &mut rng, 200.0);
        let p = SimParams::new(&g, 1.0, 1.0, Forcing::zero(&g), 0.5).unwrap();
        match step(&u, &p) {
            Err(Error::Cfl { max_u, .. }) => assert!(max_u > 0.0),
            other => panic!("expected CFL error, got {other:?}"),
        }
    }

    #[test]
    fn semigroup_restart_is_bit_exact() {
        let g = Grid::new(8).unwrap();
        let mut rng = member_rng(2, 0);
        let u0 = smooth_field(&g, &mut rng, 3.0);
        let f = Forcing::from_field(&smooth_field(&g, &mut rng, 1.0));
        let p = SimParams::new(&g, 0.5, 2.0, f, 0.02).unwrap();
        let whole = integrate(&u0, &p, 0.5, 5).unwrap();
        let first = integrate(&u0, &p, 0.2, 1).unwrap();
        let second = integrate(first.last(), &p, 0.3, 1).unwrap();
        assert!(whole.last().bit_eq(second.last()));
        let again = integrate(&u0, &p, 0.5, 5).unwrap();
        assert!(whole.last().bit_eq(again.last()));
        assert_eq!(whole.diagnostics, again.diagnostics);
        assert_eq!(whole.times.len(), 6);
    }

    #[test]
    fn unforced_energy_is_monotone_and_bounded() {
        let g = Grid::new(8).unwrap();
        let mut rng = member_rng(3, 0);
        let u0 = smooth_field(&g, &mut rng, 5.0);
        for n in [0.0, 0.5, 4.0, f64::INFINITY] {
            let p = SimParams::new(&g, 1.0, n, Forcing::zero(&g), 0.02).unwrap();
            let traj = integrate(&u0, &p, 1.0, 10).unwrap();
            for w in traj.diagnostics.windows(2) {
                assert!(w[1].norm_h <= w[0].norm_h + 1e-10);
            }
            for d in &traj.diagnostics {
                assert!(d.norm_h <= norm_h(&u0) * (-d.t).exp() * (1.0 + 1e-12));
            }
            for s in &traj.snapshots {
                assert!(s.is_hermitian());
                assert!(s.is_divergence_free(1e-12));
            }
        }
    }

    #[test]
    fn energy_budget_needs_stride_one() {
        let g = Grid::new(8).unwrap();
        let p = SimParams::new(&g, 1.0, 1.0, Forcing::zero(&g), 0.1).unwrap();
        let traj = integrate(&SpectralField::zeros(&g), &p, 0.5, 2).unwrap();
        assert!(energy_budget(&traj).is_err());
        let traj = integrate(&SpectralField::zeros(&g), &p, 0.5, 1).unwrap();
        assert!(energy_budget(&traj).unwrap().iter().all(|&r| r == 0.0));
    }

    #[test]
    fn csv_header_and_rows() {
        let g = Grid::new(4).unwrap();
        let p = SimParams::new(&g, 1.0, 1.0, Forcing::zero(&g), 0.1).unwrap();
        let traj = integrate(&SpectralField::zeros(&g), &p, 0.2, 1).unwrap();
        let mut out = Vec::new();
        traj.write_diagnostics_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], DIAGNOSTICS_HEADER);
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "0,0,0,0,0,1");
        assert_eq!(snapshot_file_name("run7", 42), "snap_run7_000000042.fld");
    }
}
