//! Transforms between retained spectral coefficients and the `n³`
//! collocation grid `x_j = 2πj/n`.
//!
//! Convention: `u(x) = Σ_k û(k) e^{ik·x}` (unnormalized inverse) and
//! `û(k) = n⁻³ Σ_x u(x) e^{-ik·x}` (forward carries the `1/n³`). With it
//! `‖u‖²_{L²} = (2π)³ Σ_k |û(k)|²`, which is what every norm in this crate
//! uses.
//!
//! The last axis goes through a real FFT; the other two are complex FFTs
//! restricted to the lines that can hold retained modes. Physical arrays are
//! stored `[i1][i2][i3]` with `i3` fastest.

use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::Grid;

/// A real vector field sampled on the collocation grid.
#[derive(Clone, Debug)]
pub struct PhysicalField {
    n: usize,
    comps: [Vec<f64>; 3],
}

impl PhysicalField {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn component(&self, d: usize) -> &[f64] {
        &self.comps[d]
    }

    /// Collocation coordinates of flat index `idx`.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let n = self.n;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        [
            (idx / (n * n)) as f64 * h,
            ((idx / n) % n) as f64 * h,
            (idx % n) as f64 * h,
        ]
    }

    /// `(Σ_x |u(x)|⁴ Δx)^{1/4}` with `Δx = (2π/n)³`.
    pub fn l4_norm(&self) -> f64 {
        let dv = (2.0 * std::f64::consts::PI / self.n as f64).powi(3);
        let s: f64 = (0..self.comps[0].len())
            .map(|i| {
                let m = self.comps[0][i].powi(2) + self.comps[1][i].powi(2) + self.comps[2][i].powi(2);
                m * m
            })
            .sum();
        (s * dv).powf(0.25)
    }

    /// `max_x |u(x)|`.
    pub fn max_speed(&self) -> f64 {
        (0..self.comps[0].len())
            .map(|i| {
                (self.comps[0][i].powi(2) + self.comps[1][i].powi(2) + self.comps[2][i].powi(2)).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

fn half(n: usize) -> usize {
    n / 2 + 1
}

/// Inverse transform of one scalar component given per retained mode.
pub(crate) fn inverse_scalar(grid: &Grid, coeff: impl Fn(usize) -> Complex64) -> Vec<f64> {
    let n = grid.n();
    let nh = half(n);
    let cut = grid.cutoff();
    let mut buf = vec![Complex64::new(0.0, 0.0); n * n * nh];
    for (i, k) in grid.retained().iter().enumerate() {
        if k[2] >= 0 {
            let idx = (grid.fft_index(k[0]) * n + grid.fft_index(k[1])) * nh + k[2] as usize;
            buf[idx] = coeff(i);
        }
    }

    let fft = grid.fft_inverse();
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];

    // axis 1: only lines whose (k2, k3) are retained
    for k2 in -cut..=cut {
        let i2 = grid.fft_index(k2);
        for i3 in 0..=cut as usize {
            for i1 in 0..n {
                line[i1] = buf[(i1 * n + i2) * nh + i3];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for i1 in 0..n {
                buf[(i1 * n + i2) * nh + i3] = line[i1];
            }
        }
    }
    // axis 2
    for i1 in 0..n {
        for i3 in 0..=cut as usize {
            for i2 in 0..n {
                line[i2] = buf[(i1 * n + i2) * nh + i3];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for i2 in 0..n {
                buf[(i1 * n + i2) * nh + i3] = line[i2];
            }
        }
    }
    // axis 3, complex-to-real
    let c2r = grid.c2r();
    let mut out = vec![0.0; n * n * n];
    let mut rscratch = c2r.make_scratch_vec();
    for (row, chunk) in buf.chunks_exact_mut(nh).enumerate() {
        // Imaginary parts of the k3 = 0 and Nyquist entries are roundoff of a
        // real field; the transform drops them.
        let _ = c2r.process_with_scratch(chunk, &mut out[row * n..(row + 1) * n], &mut rscratch);
    }
    out
}

/// Forward transform of a real scalar onto the retained modes, with the
/// `1/n³` normalization and exact conjugate symmetry.
pub(crate) fn forward_scalar(grid: &Grid, data: &[f64]) -> Vec<Complex64> {
    let n = grid.n();
    let nh = half(n);
    let cut = grid.cutoff();
    let r2c = grid.r2c();
    let mut buf = vec![Complex64::new(0.0, 0.0); n * n * nh];
    let mut rline = vec![0.0; n];
    let mut rscratch = r2c.make_scratch_vec();
    for (row, chunk) in buf.chunks_exact_mut(nh).enumerate() {
        rline.copy_from_slice(&data[row * n..(row + 1) * n]);
        r2c.process_with_scratch(&mut rline, chunk, &mut rscratch)
            .expect("buffer sizes match the plan");
    }

    let fft = grid.fft_forward();
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for i1 in 0..n {
        for i3 in 0..=cut as usize {
            for i2 in 0..n {
                line[i2] = buf[(i1 * n + i2) * nh + i3];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for i2 in 0..n {
                buf[(i1 * n + i2) * nh + i3] = line[i2];
            }
        }
    }
    for k2 in -cut..=cut {
        let i2 = grid.fft_index(k2);
        for i3 in 0..=cut as usize {
            for i1 in 0..n {
                line[i1] = buf[(i1 * n + i2) * nh + i3];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for i1 in 0..n {
                buf[(i1 * n + i2) * nh + i3] = line[i1];
            }
        }
    }

    let norm = 1.0 / (n * n * n) as f64;
    let read = |k: [i32; 3]| -> Complex64 {
        if k[2] >= 0 {
            buf[(grid.fft_index(k[0]) * n + grid.fft_index(k[1])) * nh + k[2] as usize] * norm
        } else {
            buf[(grid.fft_index(-k[0]) * n + grid.fft_index(-k[1])) * nh + (-k[2]) as usize].conj() * norm
        }
    };
    let count = grid.mode_count();
    let zero = grid.zero_index();
    let mut out = vec![Complex64::new(0.0, 0.0); count];
    for i in zero..count {
        out[i] = read(grid.retained()[i]);
    }
    for i in 0..zero {
        out[i] = out[grid.partner(i)].conj();
    }
    out
}

/// Samples `u` on the collocation grid.
pub fn to_physical(u: &SpectralField) -> PhysicalField {
    let g = u.grid();
    let c = u.coeffs();
    let comps = [0, 1, 2].map(|d| inverse_scalar(g, |i| c[i][d]));
    PhysicalField { n: g.n(), comps }
}

/// Samples an arbitrary set of per-mode complex values (one scalar) on the grid.
pub fn scalar_to_physical(grid: &Grid, coeffs: &[Complex64]) -> Vec<f64> {
    inverse_scalar(grid, |i| coeffs[i])
}

/// Projects a real scalar sampled on the grid onto the retained modes. The
/// returned mean coefficient is kept (it is not a velocity).
pub fn scalar_to_spectral(grid: &Grid, data: &[f64]) -> Vec<Complex64> {
    forward_scalar(grid, data)
}
