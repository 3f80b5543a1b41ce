use criterion::{criterion_group, criterion_main};

criterion_group!(benches, driftbias_bench::conditional, driftbias_bench::monte_carlo, driftbias_bench::series);
criterion_main!(benches);
