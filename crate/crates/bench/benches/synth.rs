use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use segunc_core::synth::{generate, SynthScenario};

fn bench_generate(c: &mut Criterion) {
    let prostate = SynthScenario::prostate_like(16, 1);
    let lidc = SynthScenario::lidc_like(16, 1);
    c.bench_function("generate/prostate_like_16", |b| {
        b.iter(|| generate(black_box(&prostate)).unwrap())
    });
    c.bench_function("generate/lidc_like_16", |b| {
        b.iter(|| generate(black_box(&lidc)).unwrap())
    });
}

criterion_group!(benches, bench_generate);
criterion_main!(benches);
