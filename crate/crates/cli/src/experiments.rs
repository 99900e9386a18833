use std::sync::Arc;

use gmnse::analysis::{
    default_ab_grid, derivative_rate_fit, SMOOTHING_SLOPE_FLOOR, gronwall_bound_check, gronwall_envelope, smoothing_rate_fit, GronwallProblem,
};
use gmnse::attractor::{
    absorbing_bound_check, build_a_union, energy_functional, positive_invariance_check, semicontinuity_experiment,
    Ensemble, SampleSchedule,
};
use gmnse::integrator::{energy_budget, evolve, integrate, snapshot_file_name, Trajectory};
use gmnse::rhs::{lipschitz_check_taper, tensor_lipschitz_check, very_weak_residual, Forcing, ForcingEntry, SimParams};
use gmnse::spectral::random::{member_rng, random_solenoidal, rough_field, smooth_field};
use gmnse::spectral::snapshot::snapshot_bytes;
use gmnse::spectral::{
    advective_pairing, inner_product, l4_norm, leray_project, norm_h, norm_v, tensor_divergence, tensor_pairing,
};
use gmnse::{Grid, SpectralField};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{ExperimentConfig, InitialConfig, InitialKind};
use crate::error::CliError;
use crate::output::{RunWriter, DIAGNOSTIC_COLUMNS, DIST_COLUMNS, ENERGY_COLUMNS};

/// Outcome of one embedded assertion.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    /// Property the check exercises.
    pub property: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, property: &'static str, passed: bool, detail: String) -> Self {
        Check {
            name: name.to_string(),
            property,
            passed,
            detail,
        }
    }
}

fn missing(key: &str) -> CliError {
    CliError::Config(format!("`{key}`: required for this experiment"))
}

/// Initial condition from the `[initial]` section.
pub fn initial_field(grid: &Arc<Grid>, init: &InitialConfig, seed: Option<u64>) -> Result<SpectralField, CliError> {
    let need_seed = || seed.ok_or_else(|| missing("seed"));
    Ok(match init.kind {
        InitialKind::Zero => SpectralField::zeros(grid),
        InitialKind::Shear => {
            // ‖sin x₂‖_H = √(4π³)
            let a = init.radius / (4.0 * std::f64::consts::PI.powi(3)).sqrt();
            let z = Complex64::new(0.0, 0.0);
            SpectralField::from_modes(grid, &[([0, 1, 0], [Complex64::new(0.0, -a / 2.0), z, z])])?
        }
        InitialKind::Smooth => smooth_field(grid, &mut member_rng(need_seed()?, 0), init.radius),
        InitialKind::Rough => rough_field(grid, need_seed()?, init.radius),
    })
}

fn diagnostics_rows(traj: &Trajectory) -> Vec<Vec<f64>> {
    traj.diagnostics
        .iter()
        .map(|d| vec![d.t, d.norm_h, d.norm_v, d.norm_l4, d.norm_h38, d.factor])
        .collect()
}

fn energy_rows(traj: &Trajectory) -> Result<Vec<Vec<f64>>, CliError> {
    Ok(energy_functional(traj)?.into_iter().map(|(t, v)| vec![t, v]).collect())
}

fn fmt_n(n: f64) -> String {
    if n.is_infinite() {
        "inf".into()
    } else {
        format!("{n}")
    }
}

pub fn simulate(cfg: &ExperimentConfig, seed: Option<u64>, w: &mut RunWriter) -> Result<Vec<Check>, CliError> {
    let p = cfg.params()?;
    let default_init = InitialConfig { kind: InitialKind::Zero, radius: 0.0 };
    let init = cfg.initial.as_ref().unwrap_or(&default_init);
    let u0 = initial_field(&p.grid, init, seed)?;
    let sched = ExperimentConfig::require(&cfg.schedule, "schedule")?;
    let t_end = sched.t_end.ok_or_else(|| missing("schedule.t_end"))?;
    let stride = sched.stride.unwrap_or(1);
    let traj = integrate(&u0, &p, t_end, stride)?;
    w.emit_csv("diagnostics.csv", DIAGNOSTIC_COLUMNS, &diagnostics_rows(&traj))?;
    w.emit_csv("energy.csv", ENERGY_COLUMNS, &energy_rows(&traj)?)?;
    for (i, u) in traj.snapshots.iter().enumerate() {
        w.write(&format!("snapshots/{}", snapshot_file_name("sim", i * stride)), "snapshot", &snapshot_bytes(u))?;
    }
    let r = absorbing_bound_check(&traj);
    Ok(vec![Check::new(
        "absorbing_bound",
        "absorbing-ball estimate",
        r.passed(),
        format!("worst margin {:e}, violations {}", r.worst_margin, r.violations.len()),
    )])
}

fn shear(grid: &Arc<Grid>, amp: f64) -> Result<SpectralField, CliError> {
    let z = Complex64::new(0.0, 0.0);
    Ok(SpectralField::from_modes(grid, &[([0, 1, 0], [Complex64::new(0.0, -amp / 2.0), z, z])])?)
}

/// Leray idempotence, divergence annihilation and the advective/divergence
/// form identity on random pairs.
pub fn spectral_identity_check(n: usize, pairs: usize, seed: u64) -> Result<Check, CliError> {
    let g = Grid::new(n)?;
    let (mut idem, mut annih, mut ident): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..pairs as u64 {
        let mut rng = member_rng(seed, i);
        let raw = &random_solenoidal(&g, &mut rng, |k| 1.0 / (1.0 + k))
            + &gmnse::spectral::random::gradient_field(&g, &mut rng);
        let p = leray_project(&raw);
        let h = norm_h(&p);
        idem = idem.max(norm_h(&(&leray_project(&p) - &p)) / h);
        annih = annih.max(p.divergence_defect());
        let u = smooth_field(&g, &mut rng, 2.0);
        let phi = random_solenoidal(&g, &mut rng, |k| (-k * k / 10.0).exp());
        let a = advective_pairing(&u, &phi)?;
        let b = tensor_pairing(&u, &u, &phi)?;
        let s = inner_product(&tensor_divergence(&u)?, &phi)?;
        let scale = norm_v(&u) * l4_norm(&u).powi(2) * norm_v(&phi);
        ident = ident.max((a + b).abs() / scale).max((s - a).abs() / scale);
    }
    Ok(Check::new(
        "spectral_identities",
        "Leray projection and strong-to-weak identity",
        idem <= 1e-14 && annih <= 1e-12 && ident <= 1e-10,
        format!("idempotence {idem:e}, annihilation {annih:e}, identity {ident:e} over {pairs} pairs at n={n}"),
    ))
}

/// Shear-mode decay against `e^{-νt}` and bit agreement across `N`.
pub fn stokes_oracle_check(n: usize, nu: f64, dt: f64, t_end: f64) -> Result<Check, CliError> {
    let g = Grid::new(n)?;
    let u0 = shear(&g, 1.0)?;
    let mut trajs = Vec::new();
    for taper_n in [0.0, 1.0, f64::INFINITY] {
        let p = SimParams::new(&g, nu, taper_n, Forcing::zero(&g), dt)?;
        trajs.push(integrate(&u0, &p, t_end, 1)?);
    }
    let h0 = norm_h(&u0);
    let worst = trajs[2]
        .diagnostics
        .iter()
        .map(|d| {
            let exact = h0 * (-nu * d.t).exp();
            (d.norm_h - exact).abs() / exact
        })
        .fold(0.0, f64::max);
    let agree = trajs[0]
        .snapshots
        .iter()
        .zip(&trajs[1].snapshots)
        .zip(&trajs[2].snapshots)
        .all(|((a, b), c)| a.bit_eq(b) && b.bit_eq(c));
    Ok(Check::new(
        "stokes_oracle",
        "exact shear decay",
        worst <= 1e-10 && agree,
        format!("max relative error {worst:e}, N in {{0,1,inf}} bit-identical: {agree}"),
    ))
}

/// Very weak form residual on a stationary Stokes solution.
pub fn stationary_weak_form_check(seed: u64) -> Result<Check, CliError> {
    let g = Grid::new(8)?;
    let nu = 1.5;
    let f = Forcing::from_entries(
        &g,
        &[ForcingEntry { k: [1, 2, 0], re: [0.0, 0.0, 0.4], im: [0.1, -0.05, 0.0] }],
    )?;
    let inv: Vec<f64> = g.k2().iter().map(|k| if *k > 0.0 { 1.0 / (nu * k) } else { 0.0 }).collect();
    let u0 = f.field().scale_modes(&inv);
    let p = SimParams::new(&g, nu, 0.0, f, 0.01)?;
    let traj = integrate(&u0, &p, 0.5, 1)?;
    let phi = smooth_field(&g, &mut member_rng(seed, 99), 1.0);
    let scale = inner_product(p.forcing.field(), &phi)?.abs().max(norm_h(p.forcing.field()) * norm_h(&phi));
    let worst = very_weak_residual(&traj, &phi, &p)?
        .iter()
        .map(|(_, r)| r.abs())
        .fold(0.0, f64::max)
        / scale;
    Ok(Check::new(
        "very_weak_stationary",
        "very weak formulation",
        worst <= 1e-6,
        format!("max relative residual {worst:e}"),
    ))
}

/// Two Grönwall controls: no integral term, and the classical closed form.
pub fn gronwall_controls_check() -> Result<Check, CliError> {
    let p0 = GronwallProblem::new(1.0, 2.0, 0.0, 0.25, 0.5, 0.5, 1.0)?;
    let e0 = gronwall_envelope(&p0)?;
    let exact0 = e0.values == p0.forcing();
    let p1 = GronwallProblem::new(0.5, 0.5, 1.0, 0.0, 0.0, 0.0, 1.0)?;
    let e1 = gronwall_envelope(&p1)?;
    let worst = e1
        .mesh
        .iter()
        .zip(&e1.values)
        .map(|(t, u)| (u - t.exp()).abs() / t.exp())
        .fold(0.0, f64::max);
    Ok(Check::new(
        "gronwall_controls",
        "singular Gronwall inequality",
        exact0 && worst <= 1e-6,
        format!("c=0 exact: {exact0}, classical max relative error {worst:e}"),
    ))
}

/// Energy-budget residual drops at second order on a small forced run.
pub fn energy_budget_order_check(seed: u64) -> Result<Check, CliError> {
    let g = Grid::new(12)?;
    let f = Forcing::from_entries(&g, &[ForcingEntry { k: [1, 1, 0], re: [0.0, 0.0, 1.0], im: [0.0; 3] }])?;
    let p = SimParams::new(&g, 0.5, 2.0, f, 0.05)?;
    let u0 = smooth_field(&g, &mut member_rng(seed, 5), 2.0);
    let worst = |q: &SimParams| -> Result<f64, CliError> {
        let t = integrate(&u0, q, 1.0, 1)?;
        Ok(energy_budget(&t)?.iter().map(|r| r.abs()).fold(0.0, f64::max))
    };
    // per-interval residuals scale as dt³, so the max drops by ≥ 8 at order 2
    let (a, b) = (worst(&p)?, worst(&p.with_dt(p.dt / 2.0))?);
    let ratio = a / b;
    Ok(Check::new(
        "energy_budget_order",
        "energy equality",
        ratio >= 3.5,
        format!("residual ratio {ratio:.3}"),
    ))
}

/// Fourth-order convergence: global error at `dt` over the error at `dt/2`,
/// both against a `dt/16` reference. The taper stays active along the whole
/// orbit; a crossing of `‖u‖_{L⁴} = N` is a kink in time that caps the order.
pub fn order_of_accuracy_check(n: usize, seed: u64) -> Result<Check, CliError> {
    let g = Grid::new(n)?;
    let f = Forcing::from_entries(
        &g,
        &[
            ForcingEntry { k: [1, 1, 0], re: [0.0, 0.0, 1.0], im: [0.0; 3] },
            ForcingEntry { k: [0, 1, 2], re: [1.0, 0.0, 0.0], im: [0.0; 3] },
        ],
    )?;
    let p = SimParams::new(&g, 0.2, 0.5, f, 0.04)?;
    let u0 = smooth_field(&g, &mut member_rng(seed, 7), 3.0);
    let t_end = 1.0;
    let reference = evolve(&u0, &p.with_dt(p.dt / 16.0), t_end)?;
    let err = |dt: f64| -> Result<f64, CliError> { Ok(norm_h(&(&evolve(&u0, &p.with_dt(dt), t_end)? - &reference))) };
    let (e1, e2) = (err(p.dt)?, err(p.dt / 2.0)?);
    let ratio = e1 / e2;
    Ok(Check::new(
        "order_of_accuracy",
        "fourth-order time integration",
        ratio >= 12.0,
        format!("errors {e1:e} / {e2:e}, ratio {ratio:.2}"),
    ))
}

pub fn verify(cfg: &ExperimentConfig, seed: Option<u64>, w: &mut RunWriter) -> Result<Vec<Check>, CliError> {
    let seed = seed.ok_or_else(|| missing("seed"))?;
    let v = ExperimentConfig::require(&cfg.verify, "verify")?;
    let mut checks = Vec::new();

    let taper = lipschitz_check_taper(v.taper_samples, seed)?;
    checks.push(Check::new(
        "taper_inequalities",
        "taper Lipschitz bound and F_N(u)|u| <= N",
        taper.passed(),
        format!(
            "{} samples, max Lipschitz ratio {:e}, max bound ratio {:e}",
            taper.samples, taper.max_lipschitz_ratio, taper.max_bound_ratio
        ),
    ));
    w.write_json("taper.json", "report", &taper)?;

    let tensor = tensor_lipschitz_check(v.tensor_pairs, &Grid::new(v.tensor_n)?, seed)?;
    checks.push(Check::new(
        "tensor_inequalities",
        "Lipschitz bound of the modified tensor",
        tensor.passed(),
        format!(
            "{} pairs, max 3N ratio {:e}, max bound ratio {:e}",
            tensor.pairs, tensor.max_lipschitz_ratio, tensor.max_bound_ratio
        ),
    ));
    w.write_json("tensor.json", "report", &tensor)?;

    checks.push(spectral_identity_check(v.identity_n, v.identity_pairs, seed)?);
    checks.push(stokes_oracle_check(16, 1.0, 0.05, 5.0)?);
    checks.push(stationary_weak_form_check(seed)?);
    checks.push(gronwall_controls_check()?);
    checks.push(energy_budget_order_check(seed)?);
    checks.push(order_of_accuracy_check(24, seed)?);
    Ok(checks)
}

#[derive(Serialize)]
struct CloudEntry {
    file: String,
    #[serde(rename = "N")]
    n: serde_json::Value,
    t: f64,
    seed: u64,
    member: u64,
    #[serde(rename = "norm_H")]
    norm_h: f64,
}

fn json_n(n: f64) -> serde_json::Value {
    if n.is_finite() {
        serde_json::json!(n)
    } else {
        serde_json::json!("inf")
    }
}

pub fn attractor(cfg: &ExperimentConfig, seed: Option<u64>, w: &mut RunWriter) -> Result<Vec<Check>, CliError> {
    let p = cfg.params()?;
    let seed = seed.ok_or_else(|| missing("seed"))?;
    let ens_cfg = ExperimentConfig::require(&cfg.ensemble, "ensemble")?;
    let sched = ExperimentConfig::require(&cfg.schedule, "schedule")?;
    if sched.n_list.is_empty() {
        return Err(missing("schedule.N_list"));
    }
    let mut checks = Vec::new();

    // absorbing estimate for every member and every N over [0, t_end]
    let t_end = sched.t_end.ok_or_else(|| missing("schedule.t_end"))?;
    let wide = Ensemble::in_ball(seed, ens_cfg.count, ens_cfg.factor, &p);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    let mut late = 0;
    for &n in &sched.n_list {
        let q = p.with_taper(n);
        for m in 0..wide.count as u64 {
            let traj = integrate(&wide.member(&p.grid, m), &q, t_end, usize::MAX)?;
            let r = absorbing_bound_check(&traj);
            violations += r.violations.len();
            worst = worst.min(r.worst_margin);
            if !r.passed() {
                late += 1;
            }
        }
    }
    checks.push(Check::new(
        "absorbing_bound",
        "absorbing-ball estimate",
        violations == 0 && late == 0,
        format!("violations {violations}, failed orbits {late}, worst margin {worst:e}"),
    ));

    // A_union cloud inside B₀
    let t_list = if sched.t_list.is_empty() { return Err(missing("schedule.t_list")) } else { &sched.t_list };
    let spacing = sched.spacing.ok_or_else(|| missing("schedule.spacing"))?;
    let per_orbit = sched.per_orbit.unwrap_or(1);
    let ball = Ensemble::in_ball(seed, ens_cfg.count, 1.0, &p);
    let cloud = build_a_union(&p, &sched.n_list, t_list, &ball, spacing, per_orbit)?;
    let mut entries = Vec::with_capacity(cloud.len());
    for (i, s) in cloud.samples.iter().enumerate() {
        let file = format!("cloud/{}", snapshot_file_name(&format!("A_union_{i:04}"), (s.time / p.dt).round() as usize));
        w.write(&file, "snapshot", &snapshot_bytes(&s.field))?;
        entries.push(CloudEntry {
            file,
            n: json_n(s.taper_n),
            t: s.time,
            seed: s.seed,
            member: s.member,
            norm_h: norm_h(&s.field),
        });
    }
    w.write_json("cloud.json", "cloud", &entries)?;

    let tau = sched.tau.unwrap_or(spacing);
    let inv = positive_invariance_check(&cloud, &p, &sched.n_list, tau)?;
    checks.push(Check::new(
        "positive_invariance",
        "positive invariance of the union cloud",
        inv.passed(),
        format!("dist_w {:e} against resolution {:e} after tau={}", inv.distance, inv.resolution, inv.tau),
    ));
    w.write_json("invariance.json", "report", &inv)?;
    Ok(checks)
}

#[derive(Serialize)]
struct SemicontinuityOut {
    #[serde(rename = "N")]
    n: Vec<serde_json::Value>,
    dist_w: Vec<f64>,
    decrease_fraction: f64,
    reference_size: usize,
    reference_resolution: f64,
}

pub fn semicontinuity(cfg: &ExperimentConfig, seed: Option<u64>, w: &mut RunWriter) -> Result<Vec<Check>, CliError> {
    let p = cfg.params()?;
    let seed = seed.ok_or_else(|| missing("seed"))?;
    let ens_cfg = ExperimentConfig::require(&cfg.ensemble, "ensemble")?;
    let sched = ExperimentConfig::require(&cfg.schedule, "schedule")?;
    if sched.n_list.is_empty() {
        return Err(missing("schedule.N_list"));
    }
    let t_transient = sched.t_transient.ok_or_else(|| missing("schedule.t_transient"))?;
    let spacing = sched.spacing.ok_or_else(|| missing("schedule.spacing"))?;
    let per_orbit = sched.per_orbit.unwrap_or(1);
    let ref_n = sched.reference_n.unwrap_or(f64::INFINITY);
    let ref_t = sched.reference_t.ok_or_else(|| missing("schedule.reference_t"))?;
    let max_n = sched.n_list.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(ref_n > max_n) {
        return Err(CliError::Config(format!("`schedule.reference_N`: must exceed max(N_list) = {max_n}")));
    }
    if !(ref_t > t_transient) {
        return Err(CliError::Config("`schedule.reference_t`: must exceed schedule.t_transient".into()));
    }
    let ens = Ensemble::in_ball(seed, ens_cfg.count, ens_cfg.factor, &p);
    let ref_ens = Ensemble { seed: seed.wrapping_add(1), ..ens };
    let reference = build_a_union(&p, &[ref_n], &[ref_t], &ref_ens, spacing, per_orbit)?;
    let schedule = SampleSchedule { t_transient, spacing, count: per_orbit };
    let r = semicontinuity_experiment(&p, &sched.n_list, &reference, &ens, &schedule)?;
    let rows: Vec<Vec<f64>> = r.series.iter().map(|&(n, d)| vec![n, d]).collect();
    w.emit_csv("dist_w.csv", DIST_COLUMNS, &rows)?;
    w.write_json(
        "semicontinuity.json",
        "report",
        &SemicontinuityOut {
            n: r.series.iter().map(|s| json_n(s.0)).collect(),
            dist_w: r.series.iter().map(|s| s.1).collect(),
            decrease_fraction: r.decrease_fraction,
            reference_size: reference.len(),
            reference_resolution: reference.resolution()?,
        },
    )?;
    let tol = &cfg.tolerances;
    let ok = r.nonincreasing_within(tol.semicontinuity_rel, tol.semicontinuity_floor);
    let series: Vec<String> = r.series.iter().map(|(n, d)| format!("{}:{d:.3e}", fmt_n(*n))).collect();
    Ok(vec![Check::new(
        "semicontinuity",
        "upper semicontinuity of attractors in N",
        ok,
        format!("dist_w series [{}], decrease fraction {:.2}", series.join(", "), r.decrease_fraction),
    )])
}

pub fn gronwall(cfg: &ExperimentConfig, w: &mut RunWriter) -> Result<Vec<Check>, CliError> {
    let g = ExperimentConfig::require(&cfg.gronwall, "gronwall")?;
    let grid = if g.a_values.is_empty() && g.b_values.is_empty() {
        default_ab_grid()
    } else if g.a_values.is_empty() || g.b_values.is_empty() {
        return Err(missing(if g.a_values.is_empty() { "gronwall.a_values" } else { "gronwall.b_values" }));
    } else {
        g.a_values.iter().flat_map(|&a| g.b_values.iter().map(move |&b| (a, b))).collect()
    };
    let prob = GronwallProblem::new(1.0, 1.0, g.c, g.alpha, g.beta, g.gamma, g.t_end)
        .map_err(|e| CliError::Config(format!("gronwall.{e}")))?;
    let report = gronwall_bound_check(&prob, &grid)?;
    let env = gronwall_envelope(&prob)?;
    let rows: Vec<Vec<f64>> = env.mesh.iter().zip(&env.values).map(|(t, u)| vec![*t, *u]).collect();
    w.emit_csv("envelope.csv", &[("t", "mesh time"), ("u", "envelope for a = b = 1")], &rows)?;
    w.write_json("gronwall.json", "report", &report)?;
    Ok(vec![Check::new(
        "gronwall_k",
        "singular Gronwall inequality",
        report.passed() && report.residual <= 1e-6,
        format!(
            "K = {:.6}, max per-pair K = {:.6}, residual {:e}, mesh {}",
            report.k,
            report.max_pair_k(),
            report.residual,
            report.mesh_size
        ),
    )])
}

#[derive(Serialize)]
struct RatesOut {
    smoothing: Vec<(f64, gmnse::analysis::RateFit)>,
    derivative: gmnse::analysis::DerivativeFit,
    derivative_refined: gmnse::analysis::DerivativeFit,
}

pub fn rates(cfg: &ExperimentConfig, seed: Option<u64>, w: &mut RunWriter) -> Result<Vec<Check>, CliError> {
    let p = cfg.params()?;
    let rc = ExperimentConfig::require(&cfg.rates, "rates")?;
    let default_init = InitialConfig { kind: InitialKind::Rough, radius: 1.0 };
    let init = cfg.initial.as_ref().unwrap_or(&default_init);
    let u0 = initial_field(&p.grid, init, seed)?;
    let coarse = integrate(&u0, &p, rc.t_end, 1)?;
    let fine = integrate(&u0, &p.with_dt(p.dt / 2.0), rc.t_end, 1)?;
    let mut checks = Vec::new();
    let mut thetas = rc.theta.clone();
    thetas.sort_by(f64::total_cmp);
    let mut smoothing = Vec::new();
    for &theta in &thetas {
        let fit = smoothing_rate_fit(&coarse, theta)?;
        checks.push(Check::new(
            &format!("smoothing_rate_{theta}"),
            "smoothing estimate",
            fit.within_smoothing_contract(),
            format!("slope {:.4} (bound {SMOOTHING_SLOPE_FLOOR}) over {} points", fit.slope, fit.n_points),
        ));
        smoothing.push((theta, fit));
    }
    let family = smoothing.windows(2).all(|w| w[1].1.slope <= w[0].1.slope);
    checks.push(Check::new(
        "smoothing_family",
        "smoothing estimate",
        family,
        "slopes nonincreasing in theta".into(),
    ));
    let d = derivative_rate_fit(&coarse, rc.eta)?;
    let d2 = derivative_rate_fit(&fine, rc.eta)?;
    checks.push(Check::new(
        "derivative_rate",
        "time-derivative decay",
        d.within_contract(),
        format!("slope {:.4} (bound {:.4})", d.fit.slope, -(0.5 + rc.eta) - 0.1),
    ));
    let change = (d.lp_norm - d2.lp_norm).abs() / d2.lp_norm;
    checks.push(Check::new(
        "derivative_lp_refinement",
        "time-derivative integrability",
        d.lp_norm.is_finite() && change <= cfg.tolerances.lp_refinement,
        format!("L^1.5 norms {:.6} / {:.6}, relative change {change:.4}", d.lp_norm, d2.lp_norm),
    ));
    w.emit_csv("diagnostics.csv", DIAGNOSTIC_COLUMNS, &diagnostics_rows(&coarse))?;
    w.write_json("rates.json", "report", &RatesOut { smoothing, derivative: d, derivative_refined: d2 })?;
    Ok(checks)
}
