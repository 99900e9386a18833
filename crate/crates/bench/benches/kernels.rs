use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use gmnse::analysis::{gronwall_envelope, GronwallProblem};
use gmnse::attractor::weak_metric;
use gmnse::integrator::step;
use gmnse::rhs::{gmnse_rhs, Forcing, SimParams};
use gmnse::spectral::random::{member_rng, smooth_field};
use gmnse::spectral::{to_physical, SpectralField};
use gmnse::Grid;

fn setup(n: usize) -> (SpectralField, SimParams) {
    let g = Grid::new(n).unwrap();
    let mut rng = member_rng(1, 0);
    let u = smooth_field(&g, &mut rng, 2.0);
    let f = Forcing::from_field(&smooth_field(&g, &mut rng, 0.5));
    let p = SimParams::new(&g, 0.5, 2.0, f, 0.01).unwrap();
    (u, p)
}

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("to_physical");
    for n in [16, 32] {
        let (u, _) = setup(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &u, |b, u| b.iter(|| to_physical(black_box(u))));
    }
    group.finish();
}

fn rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("gmnse_rhs");
    for n in [16, 32] {
        let (u, p) = setup(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &(u, p), |b, (u, p)| {
            b.iter(|| gmnse_rhs(black_box(u), p).unwrap())
        });
    }
    group.finish();
}

fn rk4_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    for n in [16, 24, 32] {
        let (u, p) = setup(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &(u, p), |b, (u, p)| {
            b.iter(|| step(black_box(u), p).unwrap())
        });
    }
    group.finish();
}

fn weak_distance(c: &mut Criterion) {
    let (u, p) = setup(24);
    let v = smooth_field(&p.grid, &mut member_rng(2, 0), 2.0);
    c.bench_function("weak_metric/24", |b| b.iter(|| weak_metric(black_box(&u), black_box(&v)).unwrap()));
}

fn gronwall(c: &mut Criterion) {
    let p = GronwallProblem::new(1.0, 1.0, 0.5, 0.25, 0.5, 0.5, 1.0).unwrap();
    c.bench_function("gronwall_envelope", |b| b.iter(|| gronwall_envelope(black_box(&p)).unwrap()));
}

criterion_group!(benches, transforms, rhs, rk4_step, weak_distance, gronwall);
criterion_main!(benches);
