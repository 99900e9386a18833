//! Seeded generators for test and ensemble fields.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use super::field::{SpectralField, ZERO_MODE};
use super::grid::Grid;
use super::ops::{fractional_norm, leray_project};

fn normal_c<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Gaussian random divergence-free field with per-mode amplitude
/// `amplitude(|k|)`.
pub fn random_solenoidal<R: Rng + ?Sized>(
    grid: &Arc<Grid>,
    rng: &mut R,
    amplitude: impl Fn(f64) -> f64,
) -> SpectralField {
    let zero = grid.zero_index();
    let mut coeffs = vec![ZERO_MODE; grid.mode_count()];
    for i in zero + 1..grid.mode_count() {
        let a = amplitude(grid.k2()[i].sqrt());
        coeffs[i] = [0, 1, 2].map(|_| normal_c(rng) * a);
    }
    let raw = SpectralField::from_coeffs(grid, coeffs).expect("length matches grid");
    leray_project(&raw)
}

/// Random gradient field `i k φ̂(k)`, the kernel of the Leray projection.
pub fn gradient_field<R: Rng + ?Sized>(grid: &Arc<Grid>, rng: &mut R) -> SpectralField {
    let zero = grid.zero_index();
    let mut coeffs = vec![ZERO_MODE; grid.mode_count()];
    for i in zero + 1..grid.mode_count() {
        let k = grid.retained()[i];
        let phi = normal_c(rng) * (-grid.k2()[i] / 4.0).exp();
        let ip = Complex64::new(-phi.im, phi.re);
        coeffs[i] = [ip * k[0] as f64, ip * k[1] as f64, ip * k[2] as f64];
    }
    SpectralField::from_coeffs(grid, coeffs).expect("length matches grid")
}

/// Smooth random field concentrated on low modes, scaled to `‖u‖_H = radius`.
pub fn smooth_field<R: Rng + ?Sized>(grid: &Arc<Grid>, rng: &mut R, radius: f64) -> SpectralField {
    let u = random_solenoidal(grid, rng, |k| (-k * k / 8.0).exp());
    normalize(u, radius)
}

/// Rough data: coefficient magnitude `|k|⁻¹` with random phases, projected
/// and scaled to `‖u‖_H = radius`. Deterministic in `seed`.
pub fn rough_field(grid: &Arc<Grid>, seed: u64, radius: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zero = grid.zero_index();
    let mut coeffs = vec![ZERO_MODE; grid.mode_count()];
    for i in zero + 1..grid.mode_count() {
        let a = grid.k2()[i].sqrt().recip();
        coeffs[i] = [0, 1, 2].map(|_| {
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            Complex64::from_polar(a, theta)
        });
    }
    let raw = SpectralField::from_coeffs(grid, coeffs).expect("length matches grid");
    normalize(leray_project(&raw), radius)
}

fn normalize(u: SpectralField, radius: f64) -> SpectralField {
    let h = fractional_norm(&u, 0.0);
    if h == 0.0 {
        u
    } else {
        u.scale(radius / h)
    }
}

/// Per-member generator: stream `member` of the ChaCha stream keyed by `seed`.
pub fn member_rng(seed: u64, member: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(member);
    rng
}
