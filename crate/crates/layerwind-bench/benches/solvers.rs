use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use layerwind::composition::{solve_fluid_particle, FluidParticleConfig};
use layerwind::experiments::{
    layer_forcing_problem, smooth_problem, solve_scheme, table_runner, two_mesh_difference,
    MeshOptions,
};
use layerwind::SchemeKind;

fn schemes(c: &mut Criterion) {
    let smooth = smooth_problem().unwrap();
    let layer = layer_forcing_problem(2f64.powi(-12)).unwrap();
    let opts = MeshOptions::default();
    let mut g = c.benchmark_group("scheme");
    for n in [128usize, 512] {
        g.bench_with_input(BenchmarkId::new("classical-upwind", n), &n, |b, &n| {
            b.iter(|| {
                solve_scheme(black_box(&smooth), SchemeKind::ClassicalUpwind, n, n, &opts).unwrap()
            })
        });
        g.bench_with_input(BenchmarkId::new("fitted-outflow", n), &n, |b, &n| {
            b.iter(|| {
                solve_scheme(black_box(&layer), SchemeKind::FittedOutflow, n, n, &opts).unwrap()
            })
        });
        g.bench_with_input(BenchmarkId::new("pulse-initial", n), &n, |b, &n| {
            b.iter(|| {
                solve_scheme(black_box(&layer), SchemeKind::PulseInitial, n, n, &opts).unwrap()
            })
        });
    }
    g.finish();
}

fn components(c: &mut Criterion) {
    let mut g = c.benchmark_group("two-mesh");
    g.sample_size(20);
    for k in [1usize, 3, 5] {
        let runner = table_runner(k).unwrap();
        g.bench_function(format!("table{k}/N=64"), |b| {
            b.iter(|| two_mesh_difference(&runner, black_box(2f64.powi(-10)), 64, 64).unwrap())
        });
    }
    g.finish();
}

fn pipeline(c: &mut Criterion) {
    let cfg = FluidParticleConfig::default().with_epsilon(2f64.powi(-8));
    let mut g = c.benchmark_group("pipeline");
    g.sample_size(20);
    g.bench_function("fluid-particle/N=128", |b| {
        b.iter(|| solve_fluid_particle(black_box(&cfg), 128, 128).unwrap())
    });
    g.finish();
}

criterion_group!(benches, schemes, components, pipeline);
criterion_main!(benches);
