use std::hint::black_box;

use criterion::{criterion_group, Criterion};
use mixstable::{free_cdf_1d, free_density, MixedStableParams, QuadratureSettings};

fn density(c: &mut Criterion) {
    let mut g = c.benchmark_group("free_density");
    let q = QuadratureSettings::default();
    for d in [1, 3] {
        let p = MixedStableParams::new(d, 1.5, 0.5, 1.0).unwrap();
        g.bench_function(format!("density_d{d}"), |b| {
            b.iter(|| free_density(black_box(1.0), black_box(2.0), &p, &q).unwrap())
        });
    }
    let p = MixedStableParams::new(1, 1.5, 0.5, 1.0).unwrap();
    g.bench_function("cdf_d1", |b| {
        b.iter(|| free_cdf_1d(black_box(1.0), black_box(0.7), &p, &q).unwrap())
    });
    g.finish();
}

criterion_group!(benches, density);
