use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mimo_slas::channel::SnrConfig;
use mimo_slas::complexity::sample_instance;
use mimo_slas::detectors::{detect, slice_bpsk, DetectorKind};
use mimo_slas::linalg::FlopCounter;
use mimo_slas::slas::{run, GradientMode, SlasConfig, SlasWorkspace};

fn bench_linear(c: &mut Criterion) {
    let mut group = c.benchmark_group("linear");
    for n in [16, 64] {
        let inst = sample_instance(n, n, 10.0, 1);
        let snr = SnrConfig::new(10.0);
        for kind in DetectorKind::ALL {
            group.bench_with_input(BenchmarkId::new(kind.as_str(), n), &inst, |b, inst| {
                b.iter(|| detect(kind, black_box(&inst.h), &inst.y, &snr, &mut FlopCounter::new()).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_slas(c: &mut Criterion) {
    let mut group = c.benchmark_group("slas");
    for n in [16, 64] {
        let inst = sample_instance(n, n, 10.0, 2);
        let mut counter = FlopCounter::new();
        let b0 = slice_bpsk(&detect(DetectorKind::Mf, &inst.h, &inst.y, &SnrConfig::new(10.0), &mut counter).unwrap());
        let ws = SlasWorkspace::precompute(&inst.h, &inst.y, &mut counter).unwrap();
        for (label, mode) in [("incremental", GradientMode::Incremental), ("full", GradientMode::FullRecompute)] {
            let cfg = SlasConfig::new(0.9, 4 * n).gradient_mode(mode);
            group.bench_with_input(BenchmarkId::new(label, n), &ws, |b, ws| {
                b.iter(|| run(black_box(ws), &b0, &cfg, None, &mut FlopCounter::new()))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_linear, bench_slas);
criterion_main!(benches);
