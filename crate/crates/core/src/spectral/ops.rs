use std::f64::consts::PI;

use num_complex::Complex64;

use super::field::{k_dot, Mode, SpectralField, ZERO_MODE};
use super::grid::Grid;
use super::transform::{forward_scalar, inverse_scalar, to_physical, PhysicalField};
use crate::error::{Error, Result};

/// Relative divergence defect accepted by operations that require a
/// solenoidal input.
pub const DIVERGENCE_TOL: f64 = 1e-10;

fn volume() -> f64 {
    (2.0 * PI).powi(3)
}

/// Leray projection `û - k (k·û)/|k|²` onto divergence-free fields. The mean
/// mode is dropped.
pub fn leray_project(v: &SpectralField) -> SpectralField {
    let g = v.grid();
    let coeffs = v
        .coeffs()
        .iter()
        .zip(g.retained())
        .zip(g.k2())
        .map(|((c, k), &k2)| {
            if k2 == 0.0 {
                return ZERO_MODE;
            }
            let s = k_dot(k, c) / k2;
            [
                c[0] - s * k[0] as f64,
                c[1] - s * k[1] as f64,
                c[2] - s * k[2] as f64,
            ]
        })
        .collect();
    let mut out = SpectralField::from_raw(g, coeffs);
    out.symmetrize();
    out
}

/// `L²(T³)` inner product, `(2π)³ Σ_k Re(û(k)·conj(v̂(k)))`.
pub fn inner_product(u: &SpectralField, v: &SpectralField) -> Result<f64> {
    u.same_grid(v)?;
    let s: f64 = u
        .coeffs()
        .iter()
        .zip(v.coeffs())
        .map(|(a, b)| (0..3).map(|d| (a[d] * b[d].conj()).re).sum::<f64>())
        .sum();
    Ok(volume() * s)
}

/// Norm of `A^α u` with `A = -Δ` on mean-free fields:
/// `((2π)³ Σ_k |k|^{4α} |û(k)|²)^{1/2}`. `α = 0` is the `H` norm, `α = 1/2`
/// the `V` norm and `α = -1/2` the dual norm of `V`.
pub fn fractional_norm(u: &SpectralField, alpha: f64) -> f64 {
    let g = u.grid();
    let s: f64 = u
        .coeffs()
        .iter()
        .zip(g.k2())
        .filter(|(_, &k2)| k2 > 0.0)
        .map(|(c, &k2)| {
            let w = if alpha == 0.0 {
                1.0
            } else if alpha == 0.5 {
                k2
            } else {
                k2.powf(2.0 * alpha)
            };
            w * (c[0].norm_sqr() + c[1].norm_sqr() + c[2].norm_sqr())
        })
        .sum();
    (volume() * s).sqrt()
}

pub fn norm_h(u: &SpectralField) -> f64 {
    fractional_norm(u, 0.0)
}

pub fn norm_v(u: &SpectralField) -> f64 {
    fractional_norm(u, 0.5)
}

/// `L⁴` norm by collocation quadrature on the `n³` grid.
pub fn l4_norm(u: &SpectralField) -> f64 {
    to_physical(u).l4_norm()
}

/// `P div(u ⊗ u)`, i.e. the projected convective term `P (u·∇)u` in
/// divergence form, computed pseudo-spectrally on the dealiased band.
pub fn tensor_divergence(u: &SpectralField) -> Result<SpectralField> {
    let defect = u.divergence_defect();
    if defect > DIVERGENCE_TOL {
        return Err(Error::NotDivergenceFree(defect));
    }
    Ok(tensor_divergence_physical(u.grid(), &to_physical(u)))
}

/// Same as [`tensor_divergence`] starting from a sampled field; no
/// divergence check.
pub(crate) fn tensor_divergence_physical(grid: &std::sync::Arc<Grid>, phys: &PhysicalField) -> SpectralField {
    const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
    let npts = phys.component(0).len();
    let mut prod = vec![0.0; npts];
    let mut hat: Vec<Vec<Complex64>> = Vec::with_capacity(6);
    for &(a, b) in &PAIRS {
        let (ua, ub) = (phys.component(a), phys.component(b));
        for (p, (x, y)) in prod.iter_mut().zip(ua.iter().zip(ub)) {
            *p = x * y;
        }
        hat.push(forward_scalar(grid, &prod));
    }
    let sym = |i: usize, j: usize| -> usize {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        PAIRS.iter().position(|&p| p == (a, b)).unwrap()
    };
    let table: [[usize; 3]; 3] = [[sym(0, 0), sym(0, 1), sym(0, 2)], [sym(1, 0), sym(1, 1), sym(1, 2)], [sym(2, 0), sym(2, 1), sym(2, 2)]];

    let coeffs: Vec<Mode> = grid
        .retained()
        .iter()
        .enumerate()
        .map(|(m, k)| {
            let mut out = ZERO_MODE;
            for i in 0..3 {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..3 {
                    s += hat[table[i][j]][m] * k[j] as f64;
                }
                out[i] = Complex64::new(-s.im, s.re);
            }
            out
        })
        .collect();
    leray_project(&SpectralField::from_raw(grid, coeffs))
}

/// Physical samples of `∂_j u_i`, indexed `[i][j]`.
pub fn velocity_gradient(u: &SpectralField) -> [[Vec<f64>; 3]; 3] {
    let g = u.grid();
    let c = u.coeffs();
    let r = g.retained();
    [0, 1, 2].map(|i| {
        [0, 1, 2].map(|j| {
            inverse_scalar(g, |m| {
                let z = c[m][i] * r[m][j] as f64;
                Complex64::new(-z.im, z.re)
            })
        })
    })
}

/// `∫ (u·∇)u · φ` by collocation quadrature of the advective form. Exact for
/// band-limited inputs because the integrand's degree stays below `n`.
pub fn advective_pairing(u: &SpectralField, phi: &SpectralField) -> Result<f64> {
    u.same_grid(phi)?;
    let pu = to_physical(u);
    let pp = to_physical(phi);
    let grad = velocity_gradient(u);
    let npts = pu.component(0).len();
    let mut s = 0.0;
    for x in 0..npts {
        for i in 0..3 {
            let adv: f64 = (0..3).map(|j| pu.component(j)[x] * grad[i][j][x]).sum();
            s += adv * pp.component(i)[x];
        }
    }
    Ok(s * u.grid().cell_volume())
}

/// `∫ (u ⊗ v) : ∇φ = ∫ u_i v_j ∂_j φ_i` by collocation quadrature.
pub fn tensor_pairing(u: &SpectralField, v: &SpectralField, phi: &SpectralField) -> Result<f64> {
    u.same_grid(v)?;
    u.same_grid(phi)?;
    let pu = to_physical(u);
    let pv = to_physical(v);
    let grad = velocity_gradient(phi);
    let npts = pu.component(0).len();
    let mut s = 0.0;
    for x in 0..npts {
        for i in 0..3 {
            for j in 0..3 {
                s += pu.component(i)[x] * pv.component(j)[x] * grad[i][j][x];
            }
        }
    }
    Ok(s * u.grid().cell_volume())
}

/// `‖a ⊗ a - b ⊗ b‖_{L²}`-type quadrature: `(Σ_x |s_a a⊗a - s_b b⊗b|²_F Δx)^{1/2}`.
pub(crate) fn scaled_tensor_difference_l2(pa: &PhysicalField, sa: f64, pb: &PhysicalField, sb: f64) -> f64 {
    let npts = pa.component(0).len();
    let mut s = 0.0;
    for x in 0..npts {
        for i in 0..3 {
            for j in 0..3 {
                let d = sa * pa.component(i)[x] * pa.component(j)[x] - sb * pb.component(i)[x] * pb.component(j)[x];
                s += d * d;
            }
        }
    }
    let dv = (2.0 * PI / pa.n() as f64).powi(3);
    (s * dv).sqrt()
}
