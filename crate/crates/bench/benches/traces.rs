//! Throughput of the certified interval traces and digit extraction.

use criterion::{criterion_group, criterion_main, Criterion};
use dal_core::cf::extract_digits;
use dal_core::interval::Interval;
use dal_core::measure::engine::{g_trace, TailEnd};
use num_rational::BigRational;

fn bench_g_trace(c: &mut Criterion) {
    let digits: Vec<Interval> = (0..10_050)
        .map(|i| Interval::from_u64(1 + (i as u64 % 5)))
        .collect();
    c.bench_function("g_trace/10k", |b| {
        b.iter(|| g_trace(&digits, 10_000, TailEnd::Truncated).unwrap().partial_sum(10_000))
    });
}

fn bench_extraction(c: &mut Criterion) {
    let mut group = c.benchmark_group("extract_digits");
    group.sample_size(10);
    group.bench_function("100k_bits", |b| {
        b.iter(|| extract_digits(100_000, 42).unwrap().certified_count)
    });
    group.finish();
}

fn bench_integral(c: &mut Criterion) {
    let pq = extract_digits(20_000, 7).unwrap().stream;
    let pairs = dal_core::cf::convergents(&pq, 2_000).unwrap();
    let t = BigRational::from_integer(pairs[2_001].q.clone());
    c.bench_function("integral/2k_digits", |b| {
        b.iter(|| dal_core::measure::integral_i(&pq, &t, 40).unwrap().total)
    });
}

criterion_group!(benches, bench_g_trace, bench_extraction, bench_integral);
criterion_main!(benches);
