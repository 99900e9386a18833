use serde::Serialize;

use crate::integrator::Trajectory;
use crate::rhs::SimParams;

/// Absolute slack on squared `H` norms in the absorbing-ball checks.
pub const ABSORB_SLACK: f64 = 1e-8;

/// `R₀² = 1 + ‖f‖²_{H_{-1/2}} / (λ₁ ν²)`, the squared radius of `B₀`.
pub fn absorbing_radius_sq(p: &SimParams) -> f64 {
    let f = p.forcing.norm_hm12();
    1.0 + f * f / (p.grid.lambda1() * p.nu * p.nu)
}

/// Radius of the `N`-independent absorbing ball `B₀`.
pub fn absorbing_radius(p: &SimParams) -> f64 {
    absorbing_radius_sq(p).sqrt()
}

/// Right side of `‖S_N(t)u₀‖² ≤ ‖u₀‖² e^{-νλ₁t} + ‖f‖²_{H_{-1/2}}/(λ₁ν²)`.
pub fn absorbing_bound(norm_u0: f64, t: f64, p: &SimParams) -> f64 {
    let lambda1 = p.grid.lambda1();
    let f = p.forcing.norm_hm12();
    norm_u0 * norm_u0 * (-p.nu * lambda1 * t).exp() + f * f / (lambda1 * p.nu * p.nu)
}

/// Time after which the bound above keeps every orbit starting in the
/// `H`-ball of radius `radius` inside `B₀`.
pub fn entry_time(radius: f64, p: &SimParams) -> f64 {
    if radius <= 1.0 {
        0.0
    } else {
        2.0 * radius.ln() / (p.nu * p.grid.lambda1())
    }
}

/// Transient that pushes the decaying term below the resolution `eps`:
/// `max(T_B, ln(R²/(ε² λ₁ ν²)) / (ν λ₁))`.
pub fn transient_time(radius: f64, eps: f64, p: &SimParams) -> f64 {
    let lambda1 = p.grid.lambda1();
    let decay = (radius * radius / (eps * eps * lambda1 * p.nu * p.nu)).ln() / (p.nu * lambda1);
    entry_time(radius, p).max(decay).max(0.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct AbsorbViolation {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AbsorbReport {
    /// `min_t (rhs - lhs)`.
    pub worst_margin: f64,
    /// First diagnostic time with `‖u‖² ≤ R₀²`.
    pub first_entry_time: Option<f64>,
    /// Analytic entry time `T_B` for `‖u₀‖`.
    pub entry_bound: f64,
    /// Whether the orbit stayed in `B₀` at every sample after `T_B`.
    pub stays_after_entry_bound: bool,
    pub violations: Vec<AbsorbViolation>,
}

impl AbsorbReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
            && self.stays_after_entry_bound
            && self.first_entry_time.map_or(false, |t| t <= self.entry_bound + 1e-12)
    }
}

/// Checks the absorbing estimate at every diagnostic sample.
pub fn absorbing_bound_check(traj: &Trajectory) -> AbsorbReport {
    let p = &traj.params;
    let norm_u0 = traj.diagnostics.first().map_or(0.0, |d| d.norm_h);
    let r2 = absorbing_radius_sq(p);
    let entry_bound = entry_time(norm_u0, p);
    let mut report = AbsorbReport {
        worst_margin: f64::INFINITY,
        first_entry_time: None,
        entry_bound,
        stays_after_entry_bound: true,
        violations: Vec::new(),
    };
    for d in &traj.diagnostics {
        let lhs = d.norm_h * d.norm_h;
        let rhs = absorbing_bound(norm_u0, d.t, p);
        report.worst_margin = report.worst_margin.min(rhs - lhs);
        if lhs > rhs + ABSORB_SLACK {
            report.violations.push(AbsorbViolation { t: d.t, lhs, rhs });
        }
        let inside = lhs <= r2 + ABSORB_SLACK;
        if inside && report.first_entry_time.is_none() {
            report.first_entry_time = Some(d.t);
        }
        if d.t >= entry_bound && !inside {
            report.stays_after_entry_bound = false;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::integrate;
    use crate::rhs::{Forcing, ForcingEntry};
    use crate::spectral::{fractional_norm, Grid, SpectralField};
    use num_complex::Complex64;

    #[test]
    fn radius_formula() {
        let g = Grid::new(8).unwrap();
        let p = SimParams::new(&g, 1.0, 1.0, Forcing::zero(&g), 0.1).unwrap();
        assert_eq!(absorbing_radius(&p), 1.0);

        // |f|²_{H_{-1/2}} = λ₁ν² gives √2
        let nu: f64 = 0.8;
        let amp = nu / (2.0 * (2.0 * std::f64::consts::PI).powi(3)).sqrt();
        let f = Forcing::from_entries(&g, &[ForcingEntry { k: [1, 0, 0], re: [0.0, amp, 0.0], im: [0.0; 3] }]).unwrap();
        assert!((f.norm_hm12() - nu).abs() < 1e-15);
        let p = SimParams::new(&g, nu, 1.0, f.clone(), 0.1).unwrap();
        assert!((absorbing_radius(&p) - 2f64.sqrt()).abs() < 1e-15);

        let p2 = SimParams::new(&g, 2.0 * nu, 1.0, f, 0.1).unwrap();
        let (a, b) = (absorbing_radius_sq(&p) - 1.0, absorbing_radius_sq(&p2) - 1.0);
        assert!((a / b - 4.0).abs() < 1e-14);
    }

    #[test]
    fn shear_decay_satisfies_bound() {
        let g = Grid::new(8).unwrap();
        let u0 = SpectralField::from_modes(
            &g,
            &[([0, 1, 0], [Complex64::new(0.0, -0.05), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)])],
        )
        .unwrap();
        let p = SimParams::new(&g, 0.5, 1.0, Forcing::zero(&g), 0.05).unwrap();
        let traj = integrate(&u0, &p, 4.0, 10).unwrap();
        let r = absorbing_bound_check(&traj);
        assert!(r.passed());
        assert!(r.worst_margin >= 0.0);
        let h0 = fractional_norm(&u0, 0.0);
        for d in &traj.diagnostics {
            let exact = h0 * h0 * (-2.0 * 0.5 * d.t).exp();
            assert!((d.norm_h * d.norm_h - exact).abs() <= 1e-13 * h0 * h0);
        }
    }

    #[test]
    fn zero_start_is_inside() {
        let g = Grid::new(8).unwrap();
        let f = Forcing::from_entries(&g, &[ForcingEntry { k: [1, 1, 0], re: [0.0, 0.0, 0.3], im: [0.0; 3] }]).unwrap();
        let p = SimParams::new(&g, 1.0, 2.0, f, 0.05).unwrap();
        let traj = integrate(&SpectralField::zeros(&g), &p, 2.0, 40).unwrap();
        let r = absorbing_bound_check(&traj);
        assert!(r.passed());
        assert_eq!(r.first_entry_time, Some(0.0));
        assert_eq!(entry_time(0.5, &p), 0.0);
    }
}
