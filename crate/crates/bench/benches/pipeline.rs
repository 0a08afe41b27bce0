//! Timings of the three stages that dominate a verification run.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64 as C64;
use trikernel::bvp::{theorem2_D0_series, DiagonalSolver};
use trikernel::enumerate::{count_walks, Domain};
use trikernel::model::preset;

fn enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate_3q");
    for m in ["reverse-kreweras", "double-kreweras"] {
        let hat = preset(m).unwrap();
        group.bench_with_input(BenchmarkId::new(m, 24), &hat, |b, hat| {
            b.iter(|| count_walks(black_box(hat), Domain::ThreeQuadrant, (0, 0), 24).unwrap())
        });
    }
    group.finish();
}

fn d0_series(c: &mut Criterion) {
    let mut group = c.benchmark_group("d0_series");
    group.sample_size(10);
    for n in [12, 24] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| theorem2_D0_series(black_box(n)).unwrap()));
    }
    group.finish();
}

fn theorem2(c: &mut Criterion) {
    let mut group = c.benchmark_group("theorem2");
    let hat = preset("reverse-kreweras").unwrap();
    group.sample_size(20);
    group.bench_function("solver_setup", |b| b.iter(|| DiagonalSolver::for_model(black_box(&hat), 0.1).unwrap()));
    let solver = DiagonalSolver::for_model(&hat, 0.1).unwrap();
    group.bench_function("eval", |b| b.iter(|| solver.theorem2_D(black_box(C64::new(0.3, -0.2))).unwrap()));
    group.bench_function("theorem1_eval", |b| b.iter(|| solver.theorem1_D(black_box(C64::new(0.3, -0.2))).unwrap()));
    group.finish();
}

criterion_group!(benches, enumeration, d0_series, theorem2);
criterion_main!(benches);
