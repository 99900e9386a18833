use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::spectral::random::{member_rng, random_solenoidal, rough_field, smooth_field};
use crate::spectral::{fractional_norm, l4_norm, Grid, SpectralField};

/// Early-time fitting window.
pub const RATE_WINDOW: (f64, f64) = (1e-3, 1e-1);
pub const MIN_FIT_POINTS: usize = 10;
/// Number of log-spaced target times in the window.
pub const FIT_TARGETS: usize = 24;
/// Contract for the smoothing fits: `slope ≥ -3/8 - 0.1`.
pub const SMOOTHING_SLOPE_FLOOR: f64 = -0.475;

#[derive(Clone, Debug, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub window: [f64; 2],
    pub n_points: usize,
}

impl RateFit {
    pub fn within_smoothing_contract(&self) -> bool {
        self.slope >= SMOOTHING_SLOPE_FLOOR
    }
}

/// Least-squares line through `(ln t, ln y)`.
pub fn log_log_fit(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(t, y)| *t > 0.0 && *y > 0.0)
        .map(|(t, y)| (t.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: pts.len() });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::TooFewSamples { needed: 2, got: 1 });
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Snapshot indices nearest to log-spaced times in the window, skipping the
/// first and last snapshot so central differences exist.
fn window_indices(traj: &Trajectory) -> Vec<usize> {
    let (lo, hi) = RATE_WINDOW;
    let times = &traj.times;
    let mut idx: Vec<usize> = (0..FIT_TARGETS)
        .map(|k| lo * (hi / lo).powf(k as f64 / (FIT_TARGETS - 1) as f64))
        .filter_map(|target| {
            (1..times.len().saturating_sub(1))
                .filter(|&i| times[i] >= lo * (1.0 - 1e-9) && times[i] <= hi * (1.0 + 1e-9))
                .min_by(|&i, &j| (times[i] - target).abs().total_cmp(&(times[j] - target).abs()))
        })
        .collect();
    idx.dedup();
    idx
}

fn fit(traj: &Trajectory, values: impl Fn(usize) -> f64) -> Result<RateFit> {
    let idx = window_indices(traj);
    if idx.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewSamples { needed: MIN_FIT_POINTS, got: idx.len() });
    }
    let pts: Vec<(f64, f64)> = idx.iter().map(|&i| (traj.times[i], values(i))).collect();
    let (slope, intercept) = log_log_fit(&pts)?;
    Ok(RateFit {
        slope,
        intercept,
        window: [RATE_WINDOW.0, RATE_WINDOW.1],
        n_points: idx.len(),
    })
}

/// Log-log slope of `‖u(t)‖_{H_θ}` over the early window.
pub fn smoothing_rate_fit(traj: &Trajectory, theta: f64) -> Result<RateFit> {
    if !(theta > 0.0 && theta < 0.5) {
        return Err(Error::InvalidParameter {
            name: "theta",
            reason: format!("must lie in (0, 1/2), got {theta}"),
        });
    }
    fit(traj, |i| fractional_norm(&traj.snapshots[i], theta))
}

/// `‖(u_{i+1} - u_{i-1}) / (t_{i+1} - t_{i-1})‖_{H_{-3/8}}` at interior
/// snapshots, one-sided at the ends.
pub fn derivative_norms(traj: &Trajectory) -> Result<Vec<(f64, f64)>> {
    let s = &traj.snapshots;
    let m = s.len();
    if m < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: m });
    }
    Ok((0..m)
        .map(|i| {
            let (lo, hi) = (i.saturating_sub(1), (i + 1).min(m - 1));
            let h = traj.times[hi] - traj.times[lo];
            (traj.times[i], fractional_norm(&(&s[hi] - &s[lo]), -0.375) / h)
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivativeFit {
    #[serde(flatten)]
    pub fit: RateFit,
    pub eta: f64,
    /// `(∫₀ᵀ ‖u'‖^{1.5}_{H_{-3/8}})^{1/1.5}`.
    pub lp_norm: f64,
}

impl DerivativeFit {
    /// `slope ≥ -(1/2 + η) - 0.1`.
    pub fn within_contract(&self) -> bool {
        self.fit.slope >= -(0.5 + self.eta) - 0.1
    }
}

pub const LP_EXPONENT: f64 = 1.5;

/// Log-log slope of `‖du/dt‖_{H_{-3/8}}` and its `L^{1.5}(0,T)` norm.
///
/// The norm integrates the snapshot series by the trapezoid rule from the
/// first interior snapshot on; the initial interval `[0, t₁]` uses the
/// fitted power law anchored at `t₁`, since the derivative is singular at 0.
pub fn derivative_rate_fit(traj: &Trajectory, eta: f64) -> Result<DerivativeFit> {
    if !(eta > 0.0 && eta < 0.125) {
        return Err(Error::InvalidParameter {
            name: "eta",
            reason: format!("must lie in (0, 1/8), got {eta}"),
        });
    }
    let d = derivative_norms(traj)?;
    let fit = fit(traj, |i| d[i].1)?;
    let q = LP_EXPONENT;
    let power = q * fit.slope + 1.0;
    if power <= 0.0 {
        return Err(Error::Domain(format!("derivative norm not in L^{q} near 0 (slope {})", fit.slope)));
    }
    let (t1, y1) = d[1];
    let mut integral = y1.powf(q) * t1 / power;
    for w in d[1..].windows(2) {
        integral += 0.5 * (w[1].0 - w[0].0) * (w[0].1.powf(q) + w[1].1.powf(q));
    }
    Ok(DerivativeFit {
        fit,
        eta,
        lp_norm: integral.powf(1.0 / q),
    })
}

/// Largest `‖u‖_{L⁴} / ‖u‖_{H_{3/8}}` over `samples` random fields of mixed
/// type (single modes, smooth, rough, flat spectra).
pub fn embedding_constant_estimate(grid: &Arc<Grid>, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let mut best: f64 = 0.0;
    for s in 0..samples as u64 {
        let mut rng = member_rng(seed, s);
        let u: SpectralField = match s % 4 {
            0 => smooth_field(grid, &mut rng, 1.0),
            1 => rough_field(grid, rng.gen(), 1.0),
            2 => {
                let width = rng.gen_range(0.5..4.0);
                random_solenoidal(grid, &mut rng, |k| (-(k / width).powi(2)).exp())
            }
            _ => random_solenoidal(grid, &mut rng, |_| 1.0),
        };
        let h = fractional_norm(&u, 0.375);
        if h > 0.0 {
            best = best.max(l4_norm(&u) / h);
        }
    }
    Ok(best)
}
