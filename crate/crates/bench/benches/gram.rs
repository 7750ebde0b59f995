// SPDX-License-Identifier: Apache-2.0

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use wavepacket::gram::{gram_matrix, inner_product, inner_product_time, DEFAULT_THRESHOLD};
use wavepacket::metric::{separation, summability};
use wavepacket::{FrequencyIndex, PacketIndex};
use wavepacket_bench::{indices, params, system};

fn pair(c: &mut Criterion) {
    let sys = system(&params(2, 2));
    let a = PacketIndex::new(FrequencyIndex::new(2, 0, 4), 1, 0);
    let b = PacketIndex::new(FrequencyIndex::new(2, 0, 5), 0, 1);
    let mut g = c.benchmark_group("inner_product");
    g.bench_function("frequency", |bench| bench.iter(|| inner_product(&sys, black_box(a), black_box(b)).unwrap()));
    g.sample_size(10);
    g.bench_function("time", |bench| bench.iter(|| inner_product_time(&sys, black_box(a), black_box(b)).unwrap()));
    g.finish();
}

fn scan(c: &mut Criterion) {
    let mut g = c.benchmark_group("gram_matrix");
    g.sample_size(10);
    for k in [1, 2] {
        let p = params(1, k);
        let (sys, idx) = (system(&p), indices(&p));
        g.bench_with_input(BenchmarkId::from_parameter(idx.len()), &idx, |bench, idx| {
            bench.iter(|| gram_matrix(idx, &sys, DEFAULT_THRESHOLD).unwrap())
        });
    }
    g.finish();
}

fn metric(c: &mut Criterion) {
    let p = params(2, 2);
    let idx = indices(&p);
    let mut g = c.benchmark_group("index_space");
    g.sample_size(10);
    g.bench_function("separation", |bench| bench.iter(|| separation(&idx, &p).unwrap()));
    g.bench_function("summability", |bench| bench.iter(|| summability(&idx, &p, 6.0).unwrap()));
    g.finish();
}

criterion_group!(benches, pair, scan, metric);
criterion_main!(benches);
