//! Criterion benchmarks for the numerical kernels.

use std::hint::black_box;

use criterion::{BenchmarkId, Criterion, Throughput};
use driftbias::{
    conditional_nu, ljung_box, monte_carlo_conditional, rng, smooth, ConditionalQuery, Direction,
    SmoothingConfig,
};

fn white_noise(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng::stream(seed, 0);
    (0..n).map(|_| rng::standard_normal(&mut r)).collect()
}

pub fn conditional(c: &mut Criterion) {
    let mut group = c.benchmark_group("conditional_nu");
    // Centre of the distribution, deep tail (continued fraction) and reflected.
    for (name, nu, threshold, direction) in [
        ("centre", 0.0, 0.0, Direction::Above),
        ("tail", -0.2, 3.0, Direction::Above),
        ("below", 0.1, -0.2, Direction::AtOrBelow),
    ] {
        let q = ConditionalQuery::new(nu, 0.3, 1.0, threshold, direction).unwrap();
        group.bench_function(name, |b| b.iter(|| conditional_nu(black_box(&q))));
    }
    group.finish();
}

pub fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("monte_carlo_conditional");
    group.sample_size(10);
    let q = ConditionalQuery::new(0.0, 0.3, 1.0, 0.0, Direction::Above).unwrap();
    for paths in [100_000usize, 1_000_000] {
        group.throughput(Throughput::Elements(paths as u64));
        group.bench_with_input(BenchmarkId::from_parameter(paths), &paths, |b, &n| {
            b.iter(|| monte_carlo_conditional(&q, n, 7))
        });
    }
    group.finish();
}

pub fn series(c: &mut Criterion) {
    let mut group = c.benchmark_group("series");
    for n in [100usize, 10_000] {
        let y = white_noise(n, 3);
        let cfg = SmoothingConfig::with_alpha(0.2).unwrap();
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("smooth", n), &y, |b, y| b.iter(|| smooth(black_box(y), &cfg)));
        group.bench_with_input(BenchmarkId::new("ljung_box_h10", n), &y, |b, y| {
            b.iter(|| ljung_box(black_box(y), 10))
        });
    }
    group.finish();
}
