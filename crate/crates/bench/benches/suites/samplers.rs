use std::hint::black_box;

use criterion::{criterion_group, Criterion};
use mixstable::sampler::{PositiveStable, SymmetricStable};
use mixstable::{IncrementMethod, IncrementSampler, MixedStableParams, SeedSpec};

fn samplers(c: &mut Criterion) {
    let mut g = c.benchmark_group("samplers");
    let mut rng = SeedSpec::new(1, 0).rng();
    let sym = SymmetricStable::new(1.5).unwrap();
    g.bench_function("symmetric_stable", |b| b.iter(|| black_box(sym.sample(&mut rng))));
    let pos = PositiveStable::new(0.75).unwrap();
    g.bench_function("positive_stable", |b| b.iter(|| black_box(pos.sample(&mut rng))));
    for (name, d, method) in [
        ("increment_d1_cms", 1, IncrementMethod::Cms),
        ("increment_d1_subordination", 1, IncrementMethod::Subordination),
        ("increment_d3_subordination", 3, IncrementMethod::Subordination),
    ] {
        let p = MixedStableParams::new(d, 1.5, 0.5, 1.0).unwrap();
        let inc = IncrementSampler::with_method(&p, 1e-3, method).unwrap();
        let mut pos = vec![0.0; d];
        g.bench_function(name, |b| b.iter(|| inc.add_to(&mut rng, black_box(&mut pos))));
    }
    g.finish();
}

criterion_group!(benches, samplers);
