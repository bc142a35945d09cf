use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use gmwp_bench::{centers, synthetic, synthetic_sized};
use gmwp_core::{
    center_representative, envelope_gradient, envelope_objective, prox_distance, solve_adaptive, solve_fixed,
    GaugeKind, MergeParams, SolveParams,
};

fn prox(c: &mut Criterion) {
    let mut group = c.benchmark_group("prox_distance");
    let a = [0.3, -1.2, 0.7, 2.0];
    let z = [1.1, 0.4, -0.9, 2.5];
    for kind in GaugeKind::ALL {
        group.bench_function(kind.as_str(), |b| b.iter(|| prox_distance(kind, black_box(&a), black_box(&z), 0.5)));
    }
    group.finish();
}

fn envelope(c: &mut Criterion) {
    let data = synthetic();
    let x = centers(&data, 10, 1);
    let mut group = c.benchmark_group("envelope_m300_k10");
    for kind in GaugeKind::ALL {
        group.bench_function(BenchmarkId::new("objective", kind), |b| {
            b.iter(|| envelope_objective(kind, black_box(&x), &data, 0.1))
        });
        group.bench_function(BenchmarkId::new("gradient", kind), |b| {
            b.iter(|| envelope_gradient(kind, black_box(&x), &data, 0.1))
        });
    }
    group.finish();
}

fn representatives(c: &mut Criterion) {
    let data = synthetic_sized(20);
    let points: Vec<&[f64]> = data.points().take(40).collect();
    let mut group = c.benchmark_group("center_representative_40");
    for kind in GaugeKind::ALL {
        group.bench_function(kind.as_str(), |b| b.iter(|| center_representative(kind, black_box(&points))));
    }
    group.finish();
}

fn solves(c: &mut Criterion) {
    let data = synthetic();
    let init = centers(&data, 10, 2026);
    let params = SolveParams::default();
    let merge = MergeParams::default();
    let mut group = c.benchmark_group("solve_synthetic_k10");
    group.sample_size(10);
    for kind in GaugeKind::ALL {
        group.bench_function(BenchmarkId::new("fixed", kind), |b| {
            b.iter(|| solve_fixed(kind, &data, &params, black_box(&init)))
        });
        group.bench_function(BenchmarkId::new("adaptive", kind), |b| {
            b.iter(|| solve_adaptive(kind, &data, &params, &merge, black_box(&init)))
        });
    }
    group.finish();
}

criterion_group!(benches, prox, envelope, representatives, solves);
criterion_main!(benches);
