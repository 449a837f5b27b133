use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ndvd_core::color::shot_color_signature;
use ndvd_core::index::synth::Scene;
use ndvd_core::ingest::{FrameDifferences, SegmentationConfig};
use ndvd_core::texture::{gabor_energy_vector, GaborBank};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn frames(n: usize, size: usize) -> Vec<ndvd_core::ingest::Frame> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let scene = Scene::random(&mut rng, size, &[]);
    (0..n).map(|k| scene.render(size, k as u64 * 40)).collect()
}

fn bench_features(c: &mut Criterion) {
    let f32px = frames(50, 32);
    let bank15 = GaborBank::new(15, 0.08, 0.4).unwrap();
    c.bench_function("gabor 32px k15", |b| {
        b.iter(|| gabor_energy_vector(black_box(&f32px[0]), &bank15).unwrap())
    });

    let f64px = frames(1, 64);
    let bank31 = GaborBank::new(31, 0.04, 0.4).unwrap();
    c.bench_function("gabor 64px k31", |b| {
        b.iter(|| gabor_energy_vector(black_box(&f64px[0]), &bank31).unwrap())
    });

    c.bench_function("color signature 50 frames", |b| {
        b.iter(|| shot_color_signature(black_box(&f32px)).unwrap())
    });

    let cfg = SegmentationConfig::default();
    c.bench_function("histogram differences 50 frames", |b| {
        b.iter(|| FrameDifferences::compute(black_box(&f32px), &cfg).unwrap())
    });
}

criterion_group!(benches, bench_features);
criterion_main!(benches);
