//! The taper `f_N`, the modification factor `F_N(u) = f_N(‖u‖_{L⁴})` and the
//! right-hand side of the globally modified system
//!
//! ```text
//! du/dt = -ν A u - F_N(u) P div(u ⊗ u) + P f
//! ```
//!
//! in Galerkin form, plus randomized checks of the inequalities the taper
//! satisfies.

mod checks;
mod params;

pub use checks::{
    lipschitz_check_taper, tensor_lipschitz_check, very_weak_residual, TaperReport, TaperViolation,
    TensorReport, TensorViolation,
};
pub use params::{Forcing, ForcingEntry, SimParams, DEFAULT_CFL};

use crate::error::{Error, Result};
use crate::spectral::{
    l4_norm, tensor_divergence_physical, to_physical, SpectralField, DIVERGENCE_TOL,
};

/// `f_N(r) = min{1, N/r}`, with `f_N(0) = 1`. `N = ∞` is allowed.
pub fn taper(r: f64, n: f64) -> Result<f64> {
    if !(r >= 0.0) || !(n >= 0.0) {
        return Err(Error::Domain(format!("taper needs r >= 0 and N >= 0, got r = {r}, N = {n}")));
    }
    if r == 0.0 || n >= r {
        Ok(1.0)
    } else {
        Ok(n / r)
    }
}

/// `F_N(u)`.
pub fn modification_factor(u: &SpectralField, n: f64) -> Result<f64> {
    taper(l4_norm(u), n)
}

/// The explicitly integrated part `-F_N(u) P div(u ⊗ u) + P f` together
/// with the by-products of evaluating it.
#[derive(Clone, Debug)]
pub(crate) struct RhsEval {
    pub explicit: SpectralField,
    pub l4: f64,
    pub max_speed: f64,
    pub factor: f64,
}

/// Evaluates everything but the Stokes term, without the divergence check.
pub(crate) fn evaluate(u: &SpectralField, p: &SimParams) -> RhsEval {
    let phys = to_physical(u);
    let l4 = phys.l4_norm();
    let factor = taper(l4, p.taper_n).expect("validated parameters");
    let g = u.grid();
    let forcing = p.forcing.field();
    let explicit = if factor == 0.0 {
        forcing.clone()
    } else {
        let conv = tensor_divergence_physical(g, &phys);
        let coeffs = conv
            .coeffs()
            .iter()
            .zip(forcing.coeffs())
            .map(|(b, f)| [0, 1, 2].map(|d| f[d] - b[d] * factor))
            .collect();
        SpectralField::from_raw(g, coeffs)
    };
    RhsEval {
        explicit,
        l4,
        max_speed: phys.max_speed(),
        factor,
    }
}

/// `-ν A u - F_N(u) P div(u ⊗ u) + P f` in spectral coefficients.
pub fn gmnse_rhs(u: &SpectralField, p: &SimParams) -> Result<SpectralField> {
    u.same_grid(p.forcing.field())?;
    let defect = u.divergence_defect();
    if defect > DIVERGENCE_TOL {
        return Err(Error::NotDivergenceFree(defect));
    }
    let explicit = evaluate(u, p).explicit;
    let g = u.grid();
    let coeffs = u
        .coeffs()
        .iter()
        .zip(explicit.coeffs())
        .zip(g.k2())
        .map(|((c, e), &k2)| {
            let a = -p.nu * k2;
            [0, 1, 2].map(|d| c[d] * a + e[d])
        })
        .collect();
    Ok(SpectralField::from_raw(g, coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random::{gradient_field, member_rng, smooth_field};
    use crate::spectral::{inner_product, leray_project, norm_h, tensor_divergence, Grid};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn taper_values() {
        assert_eq!(taper(1.0, 2.0).unwrap(), 1.0);
        assert_eq!(taper(4.0, 2.0).unwrap(), 0.5);
        assert_eq!(taper(0.0, 3.0).unwrap(), 1.0);
        assert_eq!(taper(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(taper(2.0, 0.0).unwrap(), 0.0);
        assert_eq!(taper(1e300, f64::INFINITY).unwrap(), 1.0);
        assert!(taper(-1.0, 1.0).is_err());
        assert!(taper(1.0, -1.0).is_err());
        assert!(taper(f64::NAN, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn taper_bounds(r in 0.0f64..1e6, s in 0.0f64..1e6, n in 0.0f64..1e3) {
            let fr = taper(r, n).unwrap();
            prop_assert!((0.0..=1.0).contains(&fr));
            prop_assert!(fr * r <= n * (1.0 + 1e-15) || r == 0.0);
            let (lo, hi) = if r <= s { (r, s) } else { (s, r) };
            prop_assert!(taper(hi, n).unwrap() <= taper(lo, n).unwrap());
        }
    }

    #[test]
    fn modification_factor_thresholds() {
        let g = Grid::new(8).unwrap();
        let mut rng = member_rng(1, 0);
        let u = smooth_field(&g, &mut rng, 2.0);
        let r = l4_norm(&u);
        assert_eq!(modification_factor(&u, 2.0 * r).unwrap(), 1.0);
        assert!((modification_factor(&u, r / 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(modification_factor(&SpectralField::zeros(&g), 1.0).unwrap(), 1.0);
    }

    fn params(g: &std::sync::Arc<Grid>, nu: f64, n: f64, f: Forcing) -> SimParams {
        SimParams::new(g, nu, n, f, 0.01).unwrap()
    }

    #[test]
    fn zero_state_zero_forcing() {
        let g = Grid::new(8).unwrap();
        let p = params(&g, 1.0, 1.0, Forcing::zero(&g));
        assert!(gmnse_rhs(&SpectralField::zeros(&g), &p).unwrap().is_zero());
    }

    #[test]
    fn shear_only_decays() {
        let g = Grid::new(16).unwrap();
        let u = SpectralField::from_modes(&g, &[([0, 1, 0], [c(0.0, -0.5), c(0.0, 0.0), c(0.0, 0.0)])]).unwrap();
        for n in [0.0, 0.5, 3.0, f64::INFINITY] {
            let p = params(&g, 0.7, n, Forcing::zero(&g));
            let r = gmnse_rhs(&u, &p).unwrap();
            assert!(r.bit_eq(&u.scale(-0.7)), "N = {n}");
        }
    }

    #[test]
    fn stokes_limit() {
        let g = Grid::new(12).unwrap();
        let mut rng = member_rng(2, 0);
        let u = smooth_field(&g, &mut rng, 3.0);
        let f = Forcing::from_field(&smooth_field(&g, &mut rng, 1.0));
        let p = params(&g, 0.8, 0.0, f.clone());
        let r = gmnse_rhs(&u, &p).unwrap();
        let expect = &u.scale_modes(&g.k2().iter().map(|k| -0.8 * k).collect::<Vec<_>>()) + f.field();
        assert!(norm_h(&(&r - &expect)) <= 1e-15 * norm_h(&expect));
    }

    #[test]
    fn output_is_solenoidal_and_energy_neutral() {
        let g = Grid::new(16).unwrap();
        let mut rng = member_rng(3, 0);
        let u = smooth_field(&g, &mut rng, 4.0);
        let f = Forcing::from_field(&smooth_field(&g, &mut rng, 1.0));
        for n in [0.5, 2.0, f64::INFINITY] {
            let p = params(&g, 1.0, n, f.clone());
            let r = gmnse_rhs(&u, &p).unwrap();
            assert!(r.is_divergence_free(1e-13));
            assert!(r.is_hermitian());
            let fac = modification_factor(&u, n).unwrap();
            let conv = tensor_divergence(&u).unwrap().scale(fac);
            let e = inner_product(&conv, &u).unwrap();
            assert!(e.abs() <= 1e-10 * norm_h(&conv) * norm_h(&u));
        }
    }

    #[test]
    fn rejects_compressible_state() {
        let g = Grid::new(8).unwrap();
        let mut rng = member_rng(4, 0);
        let v = gradient_field(&g, &mut rng);
        let p = params(&g, 1.0, 1.0, Forcing::zero(&g));
        assert!(matches!(gmnse_rhs(&v, &p), Err(Error::NotDivergenceFree(_))));
        let _ = leray_project(&v);
    }

    #[test]
    fn lipschitz_in_n() {
        // finite differences in N stay below |B(u)|_H / max(|u|_L4, N_min)
        let g = Grid::new(12).unwrap();
        let mut rng = member_rng(5, 0);
        let u = smooth_field(&g, &mut rng, 6.0);
        let r = l4_norm(&u);
        let bound = norm_h(&tensor_divergence(&u).unwrap()) / r;
        let ns: Vec<f64> = (1..40).map(|i| r * i as f64 / 20.0).collect();
        for w in ns.windows(2) {
            let a = gmnse_rhs(&u, &params(&g, 1.0, w[0], Forcing::zero(&g))).unwrap();
            let b = gmnse_rhs(&u, &params(&g, 1.0, w[1], Forcing::zero(&g))).unwrap();
            let slope = norm_h(&(&a - &b)) / (w[1] - w[0]);
            assert!(slope <= bound * (1.0 + 1e-9), "{slope} > {bound}");
        }
    }
}
