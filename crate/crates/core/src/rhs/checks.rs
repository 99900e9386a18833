use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use super::{taper, SimParams};
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::spectral::random::{member_rng, smooth_field};
use crate::spectral::{
    inner_product, scaled_tensor_difference_l2, tensor_pairing, to_physical, Grid, PhysicalField,
    SpectralField, DIVERGENCE_TOL,
};

/// Absolute slack for the scalar taper inequalities.
pub const TAPER_SLACK: f64 = 1e-12;
/// Relative slack for the tensor inequalities.
pub const TENSOR_SLACK: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct TaperViolation {
    pub s: f64,
    pub t: f64,
    pub n: f64,
    pub which: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct TaperReport {
    pub samples: usize,
    /// Largest `|f_N(s) - f_N(t)| / (|s - t| / max{s,t})` seen.
    pub max_lipschitz_ratio: f64,
    /// Largest `f_N(r) r / N` seen.
    pub max_bound_ratio: f64,
    pub violations: Vec<TaperViolation>,
}

impl TaperReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Random sweep of `|f_N(s) - f_N(t)| ≤ |s - t| / max{s, t}` and of
/// `f_N(r) r ≤ N`.
pub fn lipschitz_check_taper(samples: usize, seed: u64) -> Result<TaperReport> {
    if samples == 0 {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let mut rng = member_rng(seed, 0);
    let mut report = TaperReport {
        samples,
        max_lipschitz_ratio: 0.0,
        max_bound_ratio: 0.0,
        violations: Vec::new(),
    };
    for _ in 0..samples {
        let n = log_uniform(&mut rng, 1e-3, 1e3);
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| match rng.gen_range(0..20) {
            0 => 0.0,
            1 => n,
            _ => log_uniform(rng, 1e-3 * n, 1e3 * n),
        };
        let s = draw(&mut rng);
        let mut t = draw(&mut rng);
        if s + t == 0.0 {
            t = n;
        }
        let (fs, ft) = (taper(s, n)?, taper(t, n)?);
        let lhs = (fs - ft).abs();
        let rhs = (s - t).abs() / s.max(t);
        if rhs > 0.0 {
            report.max_lipschitz_ratio = report.max_lipschitz_ratio.max(lhs / rhs);
        }
        if lhs > rhs + TAPER_SLACK {
            report.violations.push(TaperViolation { s, t, n, which: "lipschitz" });
        }
        for r in [s, t] {
            let prod = taper(r, n)? * r;
            report.max_bound_ratio = report.max_bound_ratio.max(prod / n);
            if prod > n + TAPER_SLACK {
                report.violations.push(TaperViolation { s: r, t: r, n, which: "bound" });
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct TensorViolation {
    pub pair: usize,
    pub seed: u64,
    pub n: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub which: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct TensorReport {
    pub pairs: usize,
    /// Largest `‖F_N(u)u⊗u - F_N(v)v⊗v‖ / (3N‖u - v‖_{L⁴})`.
    pub max_lipschitz_ratio: f64,
    /// Largest `‖F_N(u)u⊗u‖ / (N‖u‖_{L⁴})`.
    pub max_bound_ratio: f64,
    /// Pairs with both `L⁴` norms below `N`, checked against `2N`.
    pub unclipped_pairs: usize,
    pub max_unclipped_ratio: f64,
    pub violations: Vec<TensorViolation>,
}

impl TensorReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn l4_of_difference(a: &PhysicalField, b: &PhysicalField) -> f64 {
    let npts = a.component(0).len();
    let s: f64 = (0..npts)
        .map(|x| {
            let m: f64 = (0..3).map(|d| (a.component(d)[x] - b.component(d)[x]).powi(2)).sum();
            m * m
        })
        .sum();
    let dv = (2.0 * std::f64::consts::PI / a.n() as f64).powi(3);
    (s * dv).powf(0.25)
}

/// Random sweep of `‖F_N(u)u⊗u - F_N(v)v⊗v‖_{L²} ≤ 3N‖u - v‖_{L⁴}` and
/// `‖F_N(u)u⊗u‖_{L²} ≤ N‖u‖_{L⁴}`, all norms by collocation quadrature.
pub fn tensor_lipschitz_check(pairs: usize, grid: &Arc<Grid>, seed: u64) -> Result<TensorReport> {
    if pairs == 0 {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let mut report = TensorReport {
        pairs,
        max_lipschitz_ratio: 0.0,
        max_bound_ratio: 0.0,
        unclipped_pairs: 0,
        max_unclipped_ratio: 0.0,
        violations: Vec::new(),
    };
    let zero = to_physical(&SpectralField::zeros(grid));
    for pair in 0..pairs {
        let mut rng = member_rng(seed, pair as u64);
        let ru = log_uniform(&mut rng, 0.1, 30.0);
        let u = smooth_field(grid, &mut rng, ru);
        let v = if rng.gen_bool(0.3) {
            let eps = log_uniform(&mut rng, 1e-6, 1.0);
            &u + &smooth_field(grid, &mut rng, eps * ru)
        } else {
            let rv = log_uniform(&mut rng, 0.1, 30.0);
            smooth_field(grid, &mut rng, rv)
        };
        let (pu, pv) = (to_physical(&u), to_physical(&v));
        let (lu, lv) = (pu.l4_norm(), pv.l4_norm());
        let n = log_uniform(&mut rng, 0.05 * lu.min(lv), 5.0 * lu.max(lv));
        let (fu, fv) = (taper(lu, n)?, taper(lv, n)?);

        let lhs = scaled_tensor_difference_l2(&pu, fu, &pv, fv);
        let duv = l4_of_difference(&pu, &pv);
        let rhs = 3.0 * n * duv;
        if rhs > 0.0 {
            report.max_lipschitz_ratio = report.max_lipschitz_ratio.max(lhs / rhs);
        }
        if lhs > rhs * (1.0 + TENSOR_SLACK) {
            report.violations.push(TensorViolation { pair, seed, n, lhs, rhs, which: "lipschitz" });
        }
        if lu <= n && lv <= n {
            report.unclipped_pairs += 1;
            let tight = 2.0 * n * duv;
            if tight > 0.0 {
                report.max_unclipped_ratio = report.max_unclipped_ratio.max(lhs / tight);
            }
            if lhs > tight * (1.0 + TENSOR_SLACK) {
                report.violations.push(TensorViolation { pair, seed, n, lhs, rhs: tight, which: "unclipped" });
            }
        }

        let lhs_b = scaled_tensor_difference_l2(&pu, fu, &zero, 0.0);
        let rhs_b = n * lu;
        if rhs_b > 0.0 {
            report.max_bound_ratio = report.max_bound_ratio.max(lhs_b / rhs_b);
        }
        if lhs_b > rhs_b * (1.0 + TENSOR_SLACK) {
            report.violations.push(TensorViolation { pair, seed, n, lhs: lhs_b, rhs: rhs_b, which: "bound" });
        }
    }
    Ok(report)
}

/// Residual of the very weak form
///
/// ```text
/// d/dt (u, φ) = -ν (u, Aφ) + F_N(u) ∫ u⊗u : ∇φ + (f, φ)
/// ```
///
/// at interior snapshots, with a central difference for the time
/// derivative and quadrature for the nonlinear pairing. Returns `(t, r)`.
pub fn very_weak_residual(traj: &Trajectory, phi: &SpectralField, p: &SimParams) -> Result<Vec<(f64, f64)>> {
    let snaps = &traj.snapshots;
    if snaps.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: snaps.len() });
    }
    let defect = phi.divergence_defect();
    if defect > DIVERGENCE_TOL {
        return Err(Error::NotDivergenceFree(defect));
    }
    let h = traj.sample_spacing();
    let a_phi = phi.scale_modes(phi.grid().k2());
    let f_phi = inner_product(p.forcing.field(), phi)?;
    let pair: Vec<f64> = snaps.iter().map(|u| inner_product(u, phi)).collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(snaps.len() - 2);
    for i in 1..snaps.len() - 1 {
        let u = &snaps[i];
        let ddt = (pair[i + 1] - pair[i - 1]) / (2.0 * h);
        let factor = taper(to_physical(u).l4_norm(), p.taper_n)?;
        let conv = if factor == 0.0 { 0.0 } else { factor * tensor_pairing(u, u, phi)? };
        let rhs = -p.nu * inner_product(u, &a_phi)? + conv + f_phi;
        out.push((traj.times[i], ddt - rhs));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taper_sweep_is_clean() {
        let r = lipschitz_check_taper(20_000, 11).unwrap();
        assert!(r.passed(), "{:?}", &r.violations[..r.violations.len().min(3)]);
        assert!(r.max_lipschitz_ratio <= 1.0 + 1e-12);
        assert!(r.max_bound_ratio <= 1.0 + 1e-12);
        assert!(lipschitz_check_taper(0, 1).is_err());
    }

    #[test]
    fn taper_equality_case() {
        let (s, t, n) = (1.0, 2.0, 1.0);
        let lhs = (taper(s, n).unwrap() - taper(t, n).unwrap()).abs();
        assert_eq!(lhs, 0.5);
        assert_eq!((s - t as f64).abs() / f64::max(s, t), 0.5);
    }

    #[test]
    fn tensor_sweep_small() {
        let g = Grid::new(8).unwrap();
        let r = tensor_lipschitz_check(40, &g, 5).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        assert!(r.unclipped_pairs > 0);
        assert!(r.max_unclipped_ratio <= 1.0);
    }

    #[test]
    fn identical_pair_has_zero_difference() {
        let g = Grid::new(8).unwrap();
        let mut rng = member_rng(9, 0);
        let u = smooth_field(&g, &mut rng, 2.0);
        let p = to_physical(&u);
        let fu = taper(p.l4_norm(), 1.0).unwrap();
        assert_eq!(scaled_tensor_difference_l2(&p, fu, &p, fu), 0.0);
    }
}
