//! Wavevector bookkeeping for the 2π-periodic cube.
//!
//! A grid with `n` collocation points per direction indexes the full set of
//! `n³` integer wavevectors with components in `[-n/2, n/2)`. Only the
//! dealiased subset (every `3|k_i| < n`) carries field data; those are the
//! *retained* modes. Retained modes are stored in lexicographic order of
//! `(k1, k2, k3)` with every component running from `-K` to `K`,
//! `K = (n - 1) / 3`. That ordering is the one used by the snapshot format.

use std::fmt;
use std::sync::Arc;

use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Integer wavevector.
pub type Wavevector = [i32; 3];

/// Discretization of the torus together with cached FFT plans.
pub struct Grid {
    n: usize,
    cutoff: i32,
    retained: Vec<Wavevector>,
    k2: Vec<f64>,
    partner: Vec<usize>,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
}

impl Grid {
    /// Builds the grid for `n` points per direction. `n` must be even and at
    /// least 4.
    pub fn new(n: usize) -> Result<Arc<Grid>> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidGrid(n));
        }
        let cutoff = ((n - 1) / 3) as i32;
        let side = (2 * cutoff + 1) as usize;
        let mut retained = Vec::with_capacity(side * side * side);
        for k1 in -cutoff..=cutoff {
            for k2 in -cutoff..=cutoff {
                for k3 in -cutoff..=cutoff {
                    retained.push([k1, k2, k3]);
                }
            }
        }
        let k2 = retained
            .iter()
            .map(|k| (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64)
            .collect();
        // Lexicographic order over a symmetric box: -k sits at the mirrored index.
        let count = retained.len();
        let partner = (0..count).map(|i| count - 1 - i).collect();

        let mut planner = FftPlanner::new();
        let mut real_planner = RealFftPlanner::new();
        Ok(Arc::new(Grid {
            n,
            cutoff,
            retained,
            k2,
            partner,
            fft_fwd: planner.plan_fft_forward(n),
            fft_inv: planner.plan_fft_inverse(n),
            r2c: real_planner.plan_fft_forward(n),
            c2r: real_planner.plan_fft_inverse(n),
        }))
    }

    /// Points per direction.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Largest retained wavevector component.
    pub fn cutoff(&self) -> i32 {
        self.cutoff
    }

    /// Smallest nonzero eigenvalue of the Stokes operator.
    pub fn lambda1(&self) -> f64 {
        1.0
    }

    /// Collocation cell volume `(2π/n)³`.
    pub fn cell_volume(&self) -> f64 {
        (2.0 * std::f64::consts::PI / self.n as f64).powi(3)
    }

    /// Signed wavenumber for FFT index `i` along one axis.
    pub fn wavenumber(&self, i: usize) -> i32 {
        let n = self.n as i32;
        let i = i as i32;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// FFT index along one axis for wavenumber `k`.
    pub fn fft_index(&self, k: i32) -> usize {
        k.rem_euclid(self.n as i32) as usize
    }

    /// All `n³` wavevectors of the index convention, in FFT order.
    pub fn wavevectors(&self) -> impl Iterator<Item = Wavevector> + '_ {
        let n = self.n;
        (0..n * n * n).map(move |flat| {
            let (i, j, l) = (flat / (n * n), (flat / n) % n, flat % n);
            [self.wavenumber(i), self.wavenumber(j), self.wavenumber(l)]
        })
    }

    /// Two-thirds rule: true iff every component satisfies `3|k_i| < n`.
    pub fn dealias_mask(&self, k: Wavevector) -> bool {
        k.iter().all(|&c| 3 * c.unsigned_abs() < self.n as u32)
    }

    /// Retained (dealiased) wavevectors in storage order.
    pub fn retained(&self) -> &[Wavevector] {
        &self.retained
    }

    /// Number of retained modes.
    pub fn mode_count(&self) -> usize {
        self.retained.len()
    }

    /// `|k|²` per retained mode.
    pub fn k2(&self) -> &[f64] {
        &self.k2
    }

    /// Storage index of `-k` for the mode at storage index `i`.
    pub fn partner(&self, i: usize) -> usize {
        self.partner[i]
    }

    /// Storage index of the zero mode.
    pub fn zero_index(&self) -> usize {
        self.retained.len() / 2
    }

    /// Storage index of wavevector `k`, if retained.
    pub fn index_of(&self, k: Wavevector) -> Option<usize> {
        let c = self.cutoff;
        if k.iter().any(|&x| x.abs() > c) {
            return None;
        }
        let side = (2 * c + 1) as usize;
        let [a, b, d] = k.map(|x| (x + c) as usize);
        Some((a * side + b) * side + d)
    }

    /// A mode is canonical when it is the lexicographically larger of the pair
    /// `{k, -k}`. The zero mode is not canonical.
    pub fn is_canonical(&self, i: usize) -> bool {
        i > self.zero_index()
    }

    pub(crate) fn fft_forward(&self) -> &Arc<dyn Fft<f64>> {
        &self.fft_fwd
    }

    pub(crate) fn fft_inverse(&self) -> &Arc<dyn Fft<f64>> {
        &self.fft_inv
    }

    pub(crate) fn r2c(&self) -> &Arc<dyn RealToComplex<f64>> {
        &self.r2c
    }

    pub(crate) fn c2r(&self) -> &Arc<dyn ComplexToReal<f64>> {
        &self.c2r
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("cutoff", &self.cutoff)
            .field("modes", &self.retained.len())
            .finish()
    }
}
