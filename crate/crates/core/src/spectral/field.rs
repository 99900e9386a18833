use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use super::grid::{Grid, Wavevector};
use crate::error::{Error, Result};

/// Complex 3-vector attached to one wavevector.
pub type Mode = [Complex64; 3];

pub(crate) const ZERO_MODE: Mode = [Complex64::new(0.0, 0.0); 3];

/// Velocity field `u(x) = Σ_k û(k) e^{ik·x}` stored over the retained modes
/// of a [`Grid`].
///
/// Constructors keep the zero mode at zero and the coefficients conjugate
/// symmetric, so every field represents a real, mean-free velocity. Fields
/// built through [`crate::spectral::leray_project`] are also divergence free.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Arc<Grid>,
    coeffs: Vec<Mode>,
}

impl SpectralField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        SpectralField {
            grid: Arc::clone(grid),
            coeffs: vec![ZERO_MODE; grid.mode_count()],
        }
    }

    /// Wraps raw coefficients in storage order. The caller's values at
    /// canonical modes win; their partners are overwritten with conjugates.
    pub fn from_coeffs(grid: &Arc<Grid>, coeffs: Vec<Mode>) -> Result<Self> {
        if coeffs.len() != grid.mode_count() {
            return Err(Error::Format(format!(
                "expected {} modes, got {}",
                grid.mode_count(),
                coeffs.len()
            )));
        }
        let mut f = SpectralField {
            grid: Arc::clone(grid),
            coeffs,
        };
        f.symmetrize();
        Ok(f)
    }

    /// Builds the real field `Σ (c e^{ik·x} + c.c.)` from a list of modes.
    /// Repeated wavevectors accumulate. Modes outside the retained set or at
    /// `k = 0` are rejected.
    pub fn from_modes(grid: &Arc<Grid>, modes: &[(Wavevector, Mode)]) -> Result<Self> {
        let mut f = SpectralField::zeros(grid);
        for (k, c) in modes {
            let i = grid.index_of(*k).ok_or_else(|| {
                Error::Domain(format!("wavevector {k:?} is not retained on n = {}", grid.n()))
            })?;
            if i == grid.zero_index() {
                return Err(Error::Domain("mean mode k = 0 cannot be set".into()));
            }
            let p = grid.partner(i);
            for d in 0..3 {
                f.coeffs[i][d] += c[d];
                f.coeffs[p][d] += c[d].conj();
            }
        }
        Ok(f)
    }

    pub(crate) fn from_raw(grid: &Arc<Grid>, coeffs: Vec<Mode>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.mode_count());
        SpectralField {
            grid: Arc::clone(grid),
            coeffs,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Mode] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Mode> {
        self.coeffs
    }

    /// Coefficient at wavevector `k`; zero for modes outside the retained set.
    pub fn coeff(&self, k: Wavevector) -> Mode {
        self.grid
            .index_of(k)
            .map(|i| self.coeffs[i])
            .unwrap_or(ZERO_MODE)
    }

    pub(crate) fn same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid.n() != other.grid.n() {
            return Err(Error::GridMismatch(self.grid.n(), other.grid.n()));
        }
        Ok(())
    }

    /// Copies canonical modes onto their partners as conjugates and clears
    /// the mean.
    pub(crate) fn symmetrize(&mut self) {
        let zero = self.grid.zero_index();
        for i in 0..zero {
            let p = self.grid.partner(i);
            let c = self.coeffs[p];
            self.coeffs[i] = [c[0].conj(), c[1].conj(), c[2].conj()];
        }
        self.coeffs[zero] = ZERO_MODE;
    }

    /// Exact check of `û(-k) = conj(û(k))` and `û(0) = 0`.
    pub fn is_hermitian(&self) -> bool {
        let g = &self.grid;
        self.coeffs[g.zero_index()] == ZERO_MODE
            && (0..g.mode_count()).all(|i| {
                let p = g.partner(i);
                (0..3).all(|d| self.coeffs[i][d] == self.coeffs[p][d].conj())
            })
    }

    /// `max_k |k·û(k)| / |k|` relative to the largest coefficient magnitude.
    /// Zero for the zero field.
    pub fn divergence_defect(&self) -> f64 {
        let g = &self.grid;
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (c, k) in self.coeffs.iter().zip(g.retained()) {
            let mag = mode_norm(c);
            scale = scale.max(mag);
            if k == &[0, 0, 0] {
                continue;
            }
            let div = k_dot(k, c).norm() / (g.k2()[g.index_of(*k).unwrap()]).sqrt();
            worst = worst.max(div);
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    pub fn is_divergence_free(&self, tol: f64) -> bool {
        self.divergence_defect() <= tol
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        assert_eq!(self.grid.n(), other.grid.n(), "grid mismatch in axpy");
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            for d in 0..3 {
                x[d] += y[d] * a;
            }
        }
    }

    /// Multiplies every mode by a real per-mode factor.
    pub fn scale_modes(&self, factor: &[f64]) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .zip(factor)
            .map(|(c, &s)| [c[0] * s, c[1] * s, c[2] * s])
            .collect();
        SpectralField::from_raw(&self.grid, coeffs)
    }

    pub fn scale(&self, a: f64) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| [c[0] * a, c[1] * a, c[2] * a])
            .collect();
        SpectralField::from_raw(&self.grid, coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO_MODE)
    }

    /// Exact equality of every coefficient.
    pub fn bit_eq(&self, other: &SpectralField) -> bool {
        self.grid.n() == other.grid.n() && self.coeffs == other.coeffs
    }
}

pub(crate) fn k_dot(k: &Wavevector, c: &Mode) -> Complex64 {
    c[0] * k[0] as f64 + c[1] * k[1] as f64 + c[2] * k[2] as f64
}

pub(crate) fn mode_norm(c: &Mode) -> f64 {
    (c[0].norm_sqr() + c[1].norm_sqr() + c[2].norm_sqr()).sqrt()
}

fn zip_with(a: &SpectralField, b: &SpectralField, op: impl Fn(Complex64, Complex64) -> Complex64) -> SpectralField {
    assert_eq!(a.grid.n(), b.grid.n(), "grid mismatch");
    let coeffs = a
        .coeffs
        .iter()
        .zip(&b.coeffs)
        .map(|(x, y)| [op(x[0], y[0]), op(x[1], y[1]), op(x[2], y[2])])
        .collect();
    SpectralField::from_raw(&a.grid, coeffs)
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        zip_with(self, rhs, |x, y| x + y)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        zip_with(self, rhs, |x, y| x - y)
    }
}

impl Mul<&SpectralField> for f64 {
    type Output = SpectralField;
    fn mul(self, rhs: &SpectralField) -> SpectralField {
        rhs.scale(self)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}
