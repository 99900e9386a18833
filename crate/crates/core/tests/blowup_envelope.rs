//! `‖u(t)‖_{H_{3/8}}` along tapered orbits stays below the maximal solution
//! of the singular integral inequality obtained from the mild formulation:
//!
//! ```text
//! ‖u(t)‖_{3/8} ≤ M₃₈ t^{-3/8} ‖u₀‖ + 8 M₇₈ ‖f‖_{-1/2} t^{1/8}
//!              + M₇₈ N k̂ ∫₀ᵗ (t-s)^{-7/8} ‖u(s)‖_{3/8} ds
//! ```
//!
//! with `M_α = (α/(eν))^α` and `k̂` the `L⁴ ≤ k̂ H_{3/8}` embedding constant.

use gmnse::analysis::{embedding_constant_estimate, gronwall_envelope, interpolate, GronwallProblem};
use gmnse::integrator::integrate;
use gmnse::rhs::{Forcing, ForcingEntry, SimParams};
use gmnse::spectral::random::{member_rng, smooth_field};
use gmnse::spectral::norm_h;
use gmnse::Grid;

const EMBEDDING_SAFETY: f64 = 2.0;

fn m(alpha: f64, nu: f64) -> f64 {
    (alpha / (std::f64::consts::E * nu)).powf(alpha)
}

#[test]
fn tapered_orbits_stay_below_envelope() {
    let g = Grid::new(16).unwrap();
    let k_hat = EMBEDDING_SAFETY * embedding_constant_estimate(&g, 1000, 5).unwrap();
    let f = Forcing::from_entries(
        &g,
        &[
            ForcingEntry { k: [1, 1, 0], re: [0.0, 0.0, 0.2], im: [0.0; 3] },
            ForcingEntry { k: [0, 1, 2], re: [0.2, 0.0, 0.0], im: [0.0; 3] },
        ],
    )
    .unwrap();
    let (nu, t_end) = (1.0, 1.0);
    for (seed, taper_n, radius) in [(1, 0.5, 2.0), (2, 0.25, 4.0), (3, 1.0, 1.0)] {
        let p = SimParams::new(&g, nu, taper_n, f.clone(), 0.01).unwrap();
        let u0 = smooth_field(&g, &mut member_rng(seed, 0), radius);
        let traj = integrate(&u0, &p, t_end, 100).unwrap();
        let prob = GronwallProblem::new(
            m(0.375, nu) * norm_h(&u0),
            8.0 * m(0.875, nu) * f.norm_hm12(),
            m(0.875, nu) * taper_n * k_hat,
            0.375,
            -0.125,
            0.875,
            t_end,
        )
        .unwrap();
        let env = gronwall_envelope(&prob).unwrap();
        let mut checked = 0;
        for d in &traj.diagnostics {
            if let Some(bound) = interpolate(&env, d.t) {
                assert!(d.norm_h38 <= bound, "N={taper_n}, t={}: {} > {bound}", d.t, d.norm_h38);
                checked += 1;
            }
        }
        assert!(checked >= 99);
    }
}
