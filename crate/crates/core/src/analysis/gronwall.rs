//! Maximal solution of the singular Volterra inequality
//!
//! ```text
//! u(t) ≤ a t^{-α} + b t^{-β} + c ∫₀ᵗ (t-s)^{-γ} u(s) ds
//! ```
//!
//! and the two-term bound `u(t) ≤ K a t^{-α}/(1-α) + K b t^{-β}/(1-β)`.

use serde::Serialize;
use statrs::function::beta::{beta, beta_inc};

use crate::error::{Error, Result};

/// Ratio of the geometric part of the mesh.
pub const MESH_RATIO: f64 = 1.1;
/// First mesh point as a fraction of `T`.
pub const MESH_START: f64 = 1e-4;
/// Mesh spacing is capped at `T / MESH_CAP_DIVISOR`.
pub const MESH_CAP_DIVISOR: f64 = 1024.0;
pub const PICARD_TOL: f64 = 1e-8;
pub const PICARD_MAX_SWEEPS: usize = 10_000;

#[derive(Clone, Debug, Serialize)]
pub struct GronwallProblem {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    #[serde(skip)]
    pub mesh: Vec<f64>,
}

/// Geometric mesh from `T·10⁻⁴` with ratio 1.1, spacing capped at `T/1024`.
pub fn graded_mesh(t_end: f64) -> Vec<f64> {
    let h_max = t_end / MESH_CAP_DIVISOR;
    let mut mesh = vec![t_end * MESH_START];
    loop {
        let last = *mesh.last().expect("nonempty");
        let next = (last * MESH_RATIO).min(last + h_max);
        if next >= t_end * (1.0 - 1e-12) {
            break;
        }
        mesh.push(next);
    }
    mesh.push(t_end);
    mesh
}

impl GronwallProblem {
    /// `α, β ∈ (-1, 1)` and `γ ∈ [0, 1)`; negative `α, β` describe growing
    /// forcing terms.
    pub fn new(a: f64, b: f64, c: f64, alpha: f64, beta: f64, gamma: f64, t_end: f64) -> Result<Self> {
        let bad = |name, reason: &str| Err(Error::InvalidParameter { name, reason: reason.into() });
        for (name, v) in [("a", a), ("b", b), ("c", c)] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(name, "must be nonnegative and finite");
            }
        }
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !(v > -1.0 && v < 1.0) {
                return bad(name, "must lie in (-1, 1)");
            }
        }
        if !(0.0..1.0).contains(&gamma) {
            return bad("gamma", "must lie in [0, 1)");
        }
        if !(t_end > 0.0 && t_end.is_finite()) {
            return bad("T", "must be positive and finite");
        }
        Ok(GronwallProblem {
            a,
            b,
            c,
            alpha,
            beta,
            gamma,
            t_end,
            mesh: graded_mesh(t_end),
        })
    }

    pub fn with_ab(&self, a: f64, b: f64) -> Self {
        GronwallProblem { a, b, ..self.clone() }
    }

    /// `a t^{-α} + b t^{-β}` on the mesh.
    pub fn forcing(&self) -> Vec<f64> {
        self.mesh
            .iter()
            .map(|&t| self.a * t.powf(-self.alpha) + self.b * t.powf(-self.beta))
            .collect()
    }

    /// `K a t^{-α}/(1-α) + K b t^{-β}/(1-β)` at `K = 1`.
    pub fn unit_bound(&self) -> Vec<f64> {
        self.mesh
            .iter()
            .map(|&t| {
                self.a * t.powf(-self.alpha) / (1.0 - self.alpha) + self.b * t.powf(-self.beta) / (1.0 - self.beta)
            })
            .collect()
    }
}

/// `∫₀^{t₁} (t-s)^{-γ} s^{-p} ds` for `t ≥ t₁`.
fn first_segment(t: f64, t1: f64, p: f64, gamma: f64) -> f64 {
    let x = (t1 / t).min(1.0);
    t.powf(1.0 - p - gamma) * beta_inc(1.0 - p, 1.0 - gamma, x)
}

/// Discrete integral operator
/// `(K u)_i = base_i + shape_i (u_0 - g_0) + Σ_j rows_i[j] u_j`.
///
/// On `(0, t₁]` the unknown is modelled as `g + λ h` with `g` the data and
/// `h = ∫₀ˢ (s-r)^{-γ} g(r) dr` its first Picard correction, `λ` fixed by
/// the value at `t₁`; both integrals against the kernel are incomplete
/// beta functions.
struct Kernel {
    base: Vec<f64>,
    shape: Vec<f64>,
    g0: f64,
    rows: Vec<Vec<f64>>,
}

impl Kernel {
    fn new(p: &GronwallProblem) -> Self {
        let m = &p.mesh;
        let g = p.gamma;
        let (e0, e1) = (1.0 - g, 2.0 - g);
        let t1 = m[0];
        let g0 = p.a * t1.powf(-p.alpha) + p.b * t1.powf(-p.beta);
        let (ba, bb) = (beta(1.0 - p.alpha, e0), beta(1.0 - p.beta, e0));
        let (qa, qb) = (p.alpha + g - 1.0, p.beta + g - 1.0);
        let h1 = p.a * ba * t1.powf(-qa) + p.b * bb * t1.powf(-qb);
        let base = m
            .iter()
            .map(|&t| p.a * first_segment(t, t1, p.alpha, g) + p.b * first_segment(t, t1, p.beta, g))
            .collect();
        let shape = m
            .iter()
            .map(|&t| {
                if h1 == 0.0 {
                    0.0
                } else {
                    (p.a * ba * first_segment(t, t1, qa, g) + p.b * bb * first_segment(t, t1, qb, g)) / h1
                }
            })
            .collect();
        let rows = (0..m.len())
            .map(|i| {
                let ti = m[i];
                let mut row = vec![0.0; i + 1];
                for j in 0..i {
                    let (a, b) = (ti - m[j + 1], ti - m[j]);
                    let h = m[j + 1] - m[j];
                    let i0 = (b.powf(e0) - a.powf(e0)) / e0;
                    let i1 = (b.powf(e1) - a.powf(e1)) / e1;
                    row[j] += (i1 - a * i0) / h;
                    row[j + 1] += (b * i0 - i1) / h;
                }
                row
            })
            .collect();
        Kernel { base, shape, g0, rows }
    }

    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let lift = u[0] - self.g0;
        self.rows
            .iter()
            .zip(self.base.iter().zip(&self.shape))
            .map(|(row, (b, s))| b + s * lift + row.iter().zip(u).map(|(w, x)| w * x).sum::<f64>())
            .collect()
    }
}

/// Fixed point of `u = a t^{-α} + b t^{-β} + c ∫ (t-s)^{-γ} u` on the mesh.
#[derive(Clone, Debug, Serialize)]
pub struct Envelope {
    pub mesh: Vec<f64>,
    pub values: Vec<f64>,
    pub sweeps: usize,
    /// `max_i |u_i - (g + cKu)_i| / u_i`.
    pub residual: f64,
}

pub fn gronwall_envelope(p: &GronwallProblem) -> Result<Envelope> {
    let g = p.forcing();
    if p.c == 0.0 {
        return Ok(Envelope { mesh: p.mesh.clone(), values: g, sweeps: 0, residual: 0.0 });
    }
    let kernel = Kernel::new(p);
    let mut u = g.clone();
    for sweep in 1..=PICARD_MAX_SWEEPS {
        let ku = kernel.apply(&u);
        let next: Vec<f64> = g.iter().zip(&ku).map(|(gi, k)| gi + p.c * k).collect();
        if next.iter().any(|x| !x.is_finite()) {
            // the envelope grows like exp((cΓ(1-γ))^{1/(1-γ)} t)
            return Err(Error::Domain(format!(
                "envelope overflows f64 at Picard sweep {sweep}; reduce c, gamma or T"
            )));
        }
        let change = next
            .iter()
            .zip(&u)
            .filter(|(n, _)| **n > 0.0)
            .map(|(n, o)| (n - o).abs() / n)
            .fold(0.0, f64::max);
        u = next;
        if change <= PICARD_TOL {
            let ku = kernel.apply(&u);
            let residual = u
                .iter()
                .zip(g.iter().zip(&ku))
                .filter(|(x, _)| **x > 0.0)
                .map(|(x, (gi, k))| (x - gi - p.c * k).abs() / x)
                .fold(0.0, f64::max);
            return Ok(Envelope { mesh: p.mesh.clone(), values: u, sweeps: sweep, residual });
        }
    }
    Err(Error::NoConvergence(PICARD_MAX_SWEEPS))
}

/// Least `K` with `envelope ≤ K · unit_bound` on the mesh.
fn least_k(p: &GronwallProblem, env: &Envelope) -> f64 {
    env.values
        .iter()
        .zip(p.unit_bound())
        .filter(|(_, b)| *b > 0.0)
        .map(|(u, b)| u / b)
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct PairCheck {
    pub a: f64,
    pub b: f64,
    /// Least `K` for this pair alone.
    pub least_k: f64,
    /// Whether the bound with the shared `K` dominates this envelope.
    pub dominated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GronwallReport {
    #[serde(rename = "K")]
    pub k: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub c: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub mesh_size: usize,
    /// Largest fixed-point residual over all solved envelopes.
    pub residual: f64,
    pub pairs: Vec<PairCheck>,
}

/// Relative tolerance on the `(a, b)`-independence of `K`.
pub const K_INDEPENDENCE_TOL: f64 = 1e-4;

impl GronwallReport {
    /// No pair needs more than `K (1 + 10⁻⁴)`, and `K` dominates every pair.
    pub fn passed(&self) -> bool {
        self.pairs
            .iter()
            .all(|p| p.dominated && p.least_k <= self.k * (1.0 + K_INDEPENDENCE_TOL))
    }

    pub fn max_pair_k(&self) -> f64 {
        self.pairs.iter().map(|p| p.least_k).fold(0.0, f64::max)
    }
}

/// Calibrates `K` at fixed `(c, γ, T)` and checks it against each `(a, b)`
/// in `ab_grid`.
///
/// The envelope is linear in `(a, b)`, so the least constant for any pair
/// lies between those of `(1, 0)` and `(0, 1)`; `K` is the larger of the two.
pub fn gronwall_bound_check(p: &GronwallProblem, ab_grid: &[(f64, f64)]) -> Result<GronwallReport> {
    let mut residual: f64 = 0.0;
    let mut k: f64 = 0.0;
    for (a, b) in [(1.0, 0.0), (0.0, 1.0)] {
        let q = p.with_ab(a, b);
        let env = gronwall_envelope(&q)?;
        residual = residual.max(env.residual);
        k = k.max(least_k(&q, &env));
    }
    let mut pairs = Vec::with_capacity(ab_grid.len());
    for &(a, b) in ab_grid {
        let q = p.with_ab(a, b);
        let env = gronwall_envelope(&q)?;
        residual = residual.max(env.residual);
        let lk = least_k(&q, &env);
        let dominated = env
            .values
            .iter()
            .zip(q.unit_bound())
            .all(|(u, bnd)| *u <= k * bnd * (1.0 + 1e-12));
        pairs.push(PairCheck { a, b, least_k: lk, dominated });
    }
    Ok(GronwallReport {
        k,
        alpha: p.alpha,
        beta: p.beta,
        gamma: p.gamma,
        c: p.c,
        t_end: p.t_end,
        mesh_size: p.mesh.len(),
        residual,
        pairs,
    })
}

/// `{0.25, 0.5, 1, 2, 4}²`.
pub fn default_ab_grid() -> Vec<(f64, f64)> {
    let levels = [0.25, 0.5, 1.0, 2.0, 4.0];
    levels
        .iter()
        .flat_map(|&a| levels.iter().map(move |&b| (a, b)))
        .collect()
}

/// Linear interpolation of the envelope at `t` inside the mesh.
pub fn interpolate(env: &Envelope, t: f64) -> Option<f64> {
    let m = &env.mesh;
    if t < m[0] || t > *m.last()? {
        return None;
    }
    let j = m.partition_point(|&x| x < t);
    if j == 0 {
        return Some(env.values[0]);
    }
    let (t0, t1) = (m[j - 1], m[j]);
    let w = (t - t0) / (t1 - t0);
    Some(env.values[j - 1] * (1.0 - w) + env.values[j] * w)
}
