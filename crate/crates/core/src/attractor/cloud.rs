use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::absorbing::{absorbing_radius, absorbing_radius_sq, entry_time, ABSORB_SLACK};
use crate::error::{Error, Result};
use crate::integrator::{evolve, step_count, Stepper};
use crate::rhs::SimParams;
use crate::spectral::random::{member_rng, smooth_field};
use crate::spectral::{fractional_norm, Grid, SpectralField};

/// `ρ_w(u, v) = ‖u - v‖_{H_{-1/2}}`.
pub fn weak_metric(u: &SpectralField, v: &SpectralField) -> Result<f64> {
    u.same_grid(v)?;
    Ok(fractional_norm(&(u - v), -0.5))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum CloudLabel {
    /// Samples of `𝒜_N`.
    Tapered(f64),
    /// Union over `(N_j, t_j)` approximating `𝒜`.
    Union,
}

#[derive(Clone, Debug)]
pub struct CloudSample {
    pub field: SpectralField,
    pub taper_n: f64,
    pub time: f64,
    /// Ensemble seed and member index of the initial condition.
    pub seed: u64,
    pub member: u64,
}

#[derive(Clone, Debug)]
pub struct AttractorCloud {
    pub label: CloudLabel,
    pub samples: Vec<CloudSample>,
}

impl AttractorCloud {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn max_norm_h(&self) -> f64 {
        self.samples.iter().map(|s| fractional_norm(&s.field, 0.0)).fold(0.0, f64::max)
    }

    /// Whether every sample of `self` occurs bit-exactly in `other`.
    pub fn is_subset_of(&self, other: &AttractorCloud) -> bool {
        self.samples
            .iter()
            .all(|a| other.samples.iter().any(|b| a.field.bit_eq(&b.field)))
    }

    /// Largest nearest-neighbour distance inside the cloud, the scale below
    /// which two clouds are indistinguishable. Zero for one sample.
    pub fn resolution(&self) -> Result<f64> {
        let n = self.samples.len();
        let mut eps: f64 = 0.0;
        for i in 0..n {
            let mut best = f64::INFINITY;
            for j in 0..n {
                if i != j {
                    best = best.min(weak_metric(&self.samples[i].field, &self.samples[j].field)?);
                }
            }
            if best.is_finite() {
                eps = eps.max(best);
            }
        }
        Ok(eps)
    }
}

/// `dist_w(A, B) = max_{a∈A} min_{b∈B} ρ_w(a, b)`.
pub fn hausdorff_semidistance(a: &AttractorCloud, b: &AttractorCloud) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let rows: Vec<f64> = a
        .samples
        .par_iter()
        .map(|x| {
            b.samples
                .iter()
                .map(|y| weak_metric(&x.field, &y.field))
                .try_fold(f64::INFINITY, |m, d| d.map(|d| m.min(d)))
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().fold(0.0, f64::max))
}

/// Random initial conditions with `H` norms in `[radius/2, radius]`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Ensemble {
    pub seed: u64,
    pub count: usize,
    pub radius: f64,
}

impl Ensemble {
    /// Ensemble inside `factor · B₀`.
    pub fn in_ball(seed: u64, count: usize, factor: f64, p: &SimParams) -> Self {
        Ensemble {
            seed,
            count,
            radius: factor * absorbing_radius(p),
        }
    }

    pub fn member(&self, grid: &Arc<Grid>, member: u64) -> SpectralField {
        let mut rng = member_rng(self.seed, member);
        let r = self.radius * rng.gen_range(0.5..=1.0);
        smooth_field(grid, &mut rng, r)
    }
}

/// Sampling times `t_transient + i·spacing`, `i < count`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SampleSchedule {
    pub t_transient: f64,
    pub spacing: f64,
    pub count: usize,
}

fn orbit_samples(
    u0: SpectralField,
    p: &SimParams,
    schedule: &SampleSchedule,
    seed: u64,
    member: u64,
) -> Result<Vec<CloudSample>> {
    let stepper = Stepper::new(p)?;
    let mut u = u0;
    let mut steps = 0usize;
    let mut out = Vec::with_capacity(schedule.count);
    let first = step_count(schedule.t_transient, p.dt);
    let gap = step_count(schedule.spacing, p.dt);
    for i in 0..schedule.count {
        let target = first + i * gap;
        while steps < target {
            u = stepper.advance(&u)?.0;
            steps += 1;
        }
        out.push(CloudSample {
            field: u.clone(),
            taper_n: p.taper_n,
            time: steps as f64 * p.dt,
            seed,
            member,
        });
    }
    Ok(out)
}

/// Samples `𝒜_N` by integrating every ensemble member past the transient
/// and collecting states on the schedule.
pub fn sample_attractor(
    p: &SimParams,
    taper_n: f64,
    ensemble: &Ensemble,
    schedule: &SampleSchedule,
) -> Result<AttractorCloud> {
    if ensemble.count == 0 || schedule.count == 0 {
        return Err(Error::EmptyCloud);
    }
    let t_b = entry_time(ensemble.radius, p);
    if schedule.t_transient < t_b {
        return Err(Error::InvalidParameter {
            name: "t_transient",
            reason: format!("{} is shorter than the entry time {t_b}", schedule.t_transient),
        });
    }
    let q = p.with_taper(taper_n);
    q.validate()?;
    let grid = &q.grid;
    let per_member: Vec<Vec<CloudSample>> = (0..ensemble.count as u64)
        .into_par_iter()
        .map(|m| orbit_samples(ensemble.member(grid, m), &q, schedule, ensemble.seed, m))
        .collect::<Result<_>>()?;
    let samples: Vec<CloudSample> = per_member.into_iter().flatten().collect();
    let bound = absorbing_radius_sq(&q) + ABSORB_SLACK;
    for s in &samples {
        let n2 = fractional_norm(&s.field, 0.0).powi(2);
        if n2 > bound {
            return Err(Error::OutsideAbsorbingBall { norm2: n2, bound, time: s.time });
        }
    }
    Ok(AttractorCloud {
        label: CloudLabel::Tapered(taper_n),
        samples,
    })
}

/// Union of `sample_attractor` over the pairs `(N_j, t_j)`, each `t_j`
/// serving as the transient, ordered by `(N, seed, member, time)`.
pub fn build_a_union(
    p: &SimParams,
    n_list: &[f64],
    t_list: &[f64],
    ensemble: &Ensemble,
    spacing: f64,
    per_orbit: usize,
) -> Result<AttractorCloud> {
    if n_list.is_empty() || t_list.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if n_list.len() != t_list.len() {
        return Err(Error::InvalidParameter {
            name: "t_list",
            reason: format!("length {} differs from N_list length {}", t_list.len(), n_list.len()),
        });
    }
    for (name, list) in [("N_list", n_list), ("t_list", t_list)] {
        if list.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter {
                name,
                reason: "must be strictly increasing".into(),
            });
        }
    }
    let mut samples = Vec::new();
    for (&n, &t) in n_list.iter().zip(t_list) {
        let schedule = SampleSchedule {
            t_transient: t,
            spacing,
            count: per_orbit,
        };
        samples.extend(sample_attractor(p, n, ensemble, &schedule)?.samples);
    }
    samples.sort_by(|a, b| {
        a.taper_n
            .total_cmp(&b.taper_n)
            .then(a.seed.cmp(&b.seed))
            .then(a.member.cmp(&b.member))
            .then(a.time.total_cmp(&b.time))
    });
    Ok(AttractorCloud {
        label: CloudLabel::Union,
        samples,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SemicontinuityReport {
    /// `(N, dist_w(Â_N, reference))`.
    pub series: Vec<(f64, f64)>,
    /// Fraction of successive pairs with a strict decrease.
    pub decrease_fraction: f64,
}

impl SemicontinuityReport {
    /// Every value at most `(1 + rel_tol)` times its predecessor, values
    /// below `floor` counting as zero.
    pub fn nonincreasing_within(&self, rel_tol: f64, floor: f64) -> bool {
        self.series
            .windows(2)
            .all(|w| w[1].1 <= floor || w[1].1 <= w[0].1 * (1.0 + rel_tol))
    }
}

/// `N ↦ dist_w(Â_N, reference)` over `n_list`.
pub fn semicontinuity_experiment(
    p: &SimParams,
    n_list: &[f64],
    reference: &AttractorCloud,
    ensemble: &Ensemble,
    schedule: &SampleSchedule,
) -> Result<SemicontinuityReport> {
    if n_list.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let mut series = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let cloud = sample_attractor(p, n, ensemble, schedule)?;
        series.push((n, hausdorff_semidistance(&cloud, reference)?));
    }
    let pairs = series.len().saturating_sub(1);
    let decreases = series.windows(2).filter(|w| w[1].1 < w[0].1).count();
    let decrease_fraction = if pairs == 0 { 1.0 } else { decreases as f64 / pairs as f64 };
    Ok(SemicontinuityReport { series, decrease_fraction })
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    pub tau: f64,
    pub evolved: usize,
    /// `dist_w(S_N(τ) Â, Â)` over all tested `N`.
    pub distance: f64,
    pub resolution: f64,
}

impl InvarianceReport {
    pub fn passed(&self) -> bool {
        self.distance <= self.resolution
    }
}

/// Evolves every sample for time `tau` under each `N` in `n_list` and
/// measures the semidistance back to the cloud.
pub fn positive_invariance_check(
    cloud: &AttractorCloud,
    p: &SimParams,
    n_list: &[f64],
    tau: f64,
) -> Result<InvarianceReport> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let mut evolved = Vec::with_capacity(cloud.len() * n_list.len());
    for &n in n_list {
        let q = p.with_taper(n);
        let fields: Vec<SpectralField> = cloud
            .samples
            .par_iter()
            .map(|s| evolve(&s.field, &q, tau))
            .collect::<Result<_>>()?;
        evolved.extend(cloud.samples.iter().zip(fields).map(|(s, field)| CloudSample {
            field,
            taper_n: n,
            time: s.time + tau,
            seed: s.seed,
            member: s.member,
        }));
    }
    let moved = AttractorCloud {
        label: cloud.label,
        samples: evolved,
    };
    Ok(InvarianceReport {
        tau,
        evolved: moved.len(),
        distance: hausdorff_semidistance(&moved, cloud)?,
        resolution: cloud.resolution()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rhs::{Forcing, ForcingEntry};
    use crate::spectral::{leray_project, norm_h, tensor_divergence};
    use num_complex::Complex64;

    fn cloud_of(fields: Vec<SpectralField>) -> AttractorCloud {
        AttractorCloud {
            label: CloudLabel::Union,
            samples: fields
                .into_iter()
                .enumerate()
                .map(|(i, field)| CloudSample { field, taper_n: 1.0, time: 0.0, seed: 0, member: i as u64 })
                .collect(),
        }
    }

    fn random_fields(g: &Arc<Grid>, seed: u64, count: usize) -> Vec<SpectralField> {
        (0..count as u64)
            .map(|m| smooth_field(g, &mut member_rng(seed, m), 1.0))
            .collect()
    }

    #[test]
    fn weak_metric_single_modes() {
        let g = Grid::new(8).unwrap();
        let zero = SpectralField::zeros(&g);
        let c = |x: f64| Complex64::new(x, 0.0);
        for (k, expect) in [([1, 0, 0], 1.0), ([2, 0, 0], 0.5), ([0, 2, 0], 0.5)] {
            let m = if k[0] == 0 { [c(1.0), c(0.0), c(0.0)] } else { [c(0.0), c(1.0), c(0.0)] };
            let u = SpectralField::from_modes(&g, &[(k, m)]).unwrap();
            let a = norm_h(&u);
            assert!((weak_metric(&u, &zero).unwrap() - expect * a).abs() <= 1e-14 * a);
        }
        assert_eq!(weak_metric(&zero, &zero).unwrap(), 0.0);
        assert!(weak_metric(&zero, &SpectralField::zeros(&Grid::new(6).unwrap())).is_err());
    }

    #[test]
    fn weak_metric_axioms() {
        let g = Grid::new(8).unwrap();
        let f = random_fields(&g, 3, 30);
        for t in f.chunks(3) {
            let (a, b, c) = (&t[0], &t[1], &t[2]);
            let ab = weak_metric(a, b).unwrap();
            assert_eq!(ab, weak_metric(b, a).unwrap());
            assert!(ab <= weak_metric(a, c).unwrap() + weak_metric(c, b).unwrap() + 1e-15);
            assert!(ab <= norm_h(&(a - b)) * (1.0 + 1e-15));
            assert!(ab > 0.0);
        }
    }

    #[test]
    fn hausdorff_matches_brute_force() {
        let g = Grid::new(8).unwrap();
        for seed in 0..5 {
            let a = random_fields(&g, 100 + seed, 3);
            let b = random_fields(&g, 200 + seed, 3);
            let mut brute: f64 = 0.0;
            for x in &a {
                let mut m = f64::INFINITY;
                for y in &b {
                    let d = norm_h(&(x - y).scale_modes(&g.k2().iter().map(|k| if *k > 0.0 { k.powf(-0.5) } else { 0.0 }).collect::<Vec<_>>()));
                    m = m.min(d);
                }
                brute = brute.max(m);
            }
            let got = hausdorff_semidistance(&cloud_of(a), &cloud_of(b)).unwrap();
            assert!((got - brute).abs() <= 1e-14 * brute);
        }
    }

    #[test]
    fn hausdorff_degenerate_cases() {
        let g = Grid::new(8).unwrap();
        let f = random_fields(&g, 7, 5);
        let a = cloud_of(f[..2].to_vec());
        let b = cloud_of(f.clone());
        assert_eq!(hausdorff_semidistance(&a, &b).unwrap(), 0.0);
        assert!(hausdorff_semidistance(&b, &a).unwrap() > 0.0);
        let s = cloud_of(vec![f[0].clone()]);
        let t = cloud_of(vec![f[1].clone()]);
        assert_eq!(hausdorff_semidistance(&s, &t).unwrap(), weak_metric(&f[0], &f[1]).unwrap());
        assert!(matches!(hausdorff_semidistance(&cloud_of(vec![]), &b), Err(Error::EmptyCloud)));
        // chaining: dist(A,C) ≤ dist(A,B) + dist(B,C)
        let c = cloud_of(random_fields(&g, 8, 4));
        let ab = hausdorff_semidistance(&b, &c).unwrap();
        let bc = hausdorff_semidistance(&c, &a).unwrap();
        assert!(hausdorff_semidistance(&b, &a).unwrap() <= ab + bc + 1e-15);
    }

    fn forcing_small(g: &Arc<Grid>, amp: f64) -> Forcing {
        Forcing::from_entries(
            g,
            &[
                ForcingEntry { k: [1, 1, 0], re: [0.0, 0.0, amp], im: [0.0; 3] },
                ForcingEntry { k: [0, 1, 2], re: [amp, 0.0, 0.0], im: [0.0, 0.0, 0.0] },
            ],
        )
        .unwrap()
    }

    #[test]
    fn unforced_cloud_collapses() {
        let g = Grid::new(8).unwrap();
        let p = SimParams::new(&g, 1.0, 2.0, Forcing::zero(&g), 0.05).unwrap();
        let ens = Ensemble::in_ball(1, 3, 3.0, &p);
        let sched = SampleSchedule { t_transient: 8.0, spacing: 1.0, count: 2 };
        let cloud = sample_attractor(&p, 2.0, &ens, &sched).unwrap();
        assert_eq!(cloud.len(), 6);
        assert!(cloud.max_norm_h() <= ens.radius * (-8.0f64).exp() + 1e-8);
        let short = SampleSchedule { t_transient: 0.5, ..sched };
        assert!(sample_attractor(&p, 2.0, &ens, &short).is_err());
    }

    #[test]
    fn forced_stokes_regime_matches_fixed_point() {
        let g = Grid::new(8).unwrap();
        let nu = 2.0;
        let f = forcing_small(&g, 0.02);
        let p = SimParams::new(&g, nu, 5.0, f.clone(), 0.05).unwrap();

        // ν A u = P f - B(u), iterated from the Stokes solution
        let inv: Vec<f64> = g.k2().iter().map(|k| if *k > 0.0 { 1.0 / (nu * k) } else { 0.0 }).collect();
        let mut u = f.field().scale_modes(&inv);
        for _ in 0..60 {
            let b = tensor_divergence(&u).unwrap();
            u = leray_project(&(f.field() - &b).scale_modes(&inv));
        }

        let ens = Ensemble::in_ball(5, 2, 1.0, &p);
        let sched = SampleSchedule { t_transient: 12.0, spacing: 0.5, count: 2 };
        let cloud = sample_attractor(&p, 5.0, &ens, &sched).unwrap();
        for s in &cloud.samples {
            assert!(norm_h(&(&s.field - &u)) <= 1e-6, "{}", norm_h(&(&s.field - &u)));
        }
    }

    #[test]
    fn union_is_ordered_and_monotone() {
        let g = Grid::new(8).unwrap();
        let p = SimParams::new(&g, 1.0, 1.0, forcing_small(&g, 0.3), 0.05).unwrap();
        let ens = Ensemble::in_ball(2, 2, 1.0, &p);
        let single = build_a_union(&p, &[2.0], &[4.0], &ens, 0.5, 2).unwrap();
        let direct = sample_attractor(&p, 2.0, &ens, &SampleSchedule { t_transient: 4.0, spacing: 0.5, count: 2 }).unwrap();
        assert_eq!(single.len(), direct.len());
        assert!(single.is_subset_of(&direct) && direct.is_subset_of(&single));
        let wide = build_a_union(&p, &[2.0, 4.0], &[4.0, 5.0], &ens, 0.5, 2).unwrap();
        assert!(single.is_subset_of(&wide));
        assert_eq!(wide.label, CloudLabel::Union);
        assert!(wide.samples.windows(2).all(|w| w[0].taper_n <= w[1].taper_n));
        assert!(build_a_union(&p, &[4.0, 2.0], &[3.0, 4.0], &ens, 0.5, 2).is_err());
        assert!(build_a_union(&p, &[], &[], &ens, 0.5, 2).is_err());
    }

    #[test]
    fn unforced_semicontinuity_is_flat() {
        let g = Grid::new(8).unwrap();
        let p = SimParams::new(&g, 1.0, 1.0, Forcing::zero(&g), 0.05).unwrap();
        let ens = Ensemble::in_ball(4, 2, 1.0, &p);
        let sched = SampleSchedule { t_transient: 16.0, spacing: 1.0, count: 1 };
        let reference = build_a_union(&p, &[8.0], &[18.0], &ens, 1.0, 1).unwrap();
        let r = semicontinuity_experiment(&p, &[1.0, 2.0, 4.0], &reference, &ens, &sched).unwrap();
        assert!(r.series.iter().all(|&(_, d)| d <= 1e-6));
        assert!(r.nonincreasing_within(0.1, 1e-6));
    }

    #[test]
    fn invariance_of_a_fixed_point_cloud() {
        let g = Grid::new(8).unwrap();
        let p = SimParams::new(&g, 2.0, 5.0, forcing_small(&g, 0.02), 0.05).unwrap();
        let ens = Ensemble::in_ball(6, 2, 1.0, &p);
        let cloud = build_a_union(&p, &[5.0], &[12.0], &ens, 0.5, 2).unwrap();
        let r = positive_invariance_check(&cloud, &p, &[5.0, 10.0], 1.0).unwrap();
        assert_eq!(r.evolved, 8);
        assert!(r.distance <= 1e-7);
    }
}
