use std::hint::black_box;

use criterion::{criterion_group, Criterion};
use mixstable::fraclap::{frac_laplacian_1d, truncated_frac_laplacian_1d, Profile};

fn fraclap(c: &mut Criterion) {
    let mut g = c.benchmark_group("fraclap");
    let w = Profile::Power { p: 1.125 };
    g.bench_function("power_full", |b| {
        b.iter(|| frac_laplacian_1d(&w, 1.5, black_box(0.5), 1e-10).unwrap())
    });
    g.bench_function("power_truncated", |b| {
        b.iter(|| truncated_frac_laplacian_1d(&w, 1.5, 1.0, black_box(1e-4), 1e-10).unwrap())
    });
    g.finish();
}

criterion_group!(benches, fraclap);
