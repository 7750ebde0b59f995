// SPDX-License-Identifier: Apache-2.0

use criterion::{criterion_group, criterion_main, Criterion};
use wavepacket::frame::{analyze, gaussian_signal, FrameOperator};
use wavepacket::Vec2;
use wavepacket_bench::{frame_grid, params, system};

fn frame(c: &mut Criterion) {
    let sys = system(&params(2, 1));
    let grid = frame_grid();
    let f = gaussian_signal(grid, Vec2::zeros(), 0.6);
    let op = FrameOperator::new(&sys, grid).unwrap();

    let mut g = c.benchmark_group("frame");
    g.sample_size(10);
    g.bench_function("operator_setup", |b| b.iter(|| FrameOperator::new(&sys, grid).unwrap()));
    g.bench_function("apply", |b| b.iter(|| op.apply(&f).unwrap()));
    g.bench_function("analyze_fft", |b| b.iter(|| op.analyze(&f, &sys.params).unwrap()));
    g.bench_function("analyze_direct", |b| b.iter(|| analyze(&f, &sys).unwrap()));
    g.finish();
}

criterion_group!(benches, frame);
criterion_main!(benches);
