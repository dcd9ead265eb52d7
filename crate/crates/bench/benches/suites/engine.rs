use std::hint::black_box;

use criterion::{criterion_group, Criterion};
use mixstable::engine::estimate_survival;
use mixstable::{Domain, McSettings, MixedStableParams, SeedSpec};

fn engine(c: &mut Criterion) {
    let mut g = c.benchmark_group("engine");
    g.sample_size(10);
    let dom = Domain::interval(0.0, 1.0).unwrap();
    let p = MixedStableParams::new(1, 1.5, 0.5, 1.0).unwrap();
    let mc = McSettings::new(1_000, 1e-3, SeedSpec::new(3, 0));
    g.bench_function("survival_1000_paths_1000_steps", |b| {
        b.iter(|| estimate_survival(&dom, &p, black_box(&[0.0]), 1.0, &mc).unwrap())
    });
    g.finish();
}

criterion_group!(benches, engine);
