use criterion::{criterion_group, criterion_main, Criterion};
use gaboredge::detector::{detect_edges, prepare, DetectorConfig};
use gaboredge::gabor::GaborParams;
use gaboredge::synth;

fn compact_config() -> DetectorConfig {
    DetectorConfig {
        gabor: GaborParams {
            frequencies: vec![0.25, 0.5],
            ..GaborParams::default()
        },
        ..DetectorConfig::default()
    }
}

fn bench_detect(c: &mut Criterion) {
    let mut group = c.benchmark_group("detect_edges");
    group.sample_size(10);
    let (img, _) = synth::shapes_scene(64, 64, 1);

    group.bench_function("64x64/stock", |b| {
        let cfg = DetectorConfig::default();
        b.iter(|| detect_edges(std::hint::black_box(&img), &cfg).unwrap())
    });
    group.bench_function("64x64/compact", |b| {
        let cfg = compact_config();
        b.iter(|| detect_edges(std::hint::black_box(&img), &cfg).unwrap())
    });
    group.finish();
}

fn bench_threshold_reuse(c: &mut Criterion) {
    // finalize is the per-grid-point cost of a sweep
    let (img, _) = synth::shapes_scene(64, 64, 2);
    let cfg = compact_config();
    let prepared = prepare(&img, &cfg).unwrap();
    c.bench_function("finalize/64x64", |b| {
        b.iter(|| {
            prepared
                .finalize(std::hint::black_box(0.7), 0.9, cfg.connectivity)
                .unwrap()
        })
    });
}

criterion_group!(benches, bench_detect, bench_threshold_reuse);
criterion_main!(benches);
