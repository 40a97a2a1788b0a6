use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use urp_core::rate_control::{lomax_sum_cdf, mrc_quantile_numeric};
use urp_core::sir_model::setups;
use urp_core::{allocate, LinkConfig, Method, Scheme};

fn allocators(c: &mut Criterion) {
    let dist = setups::fig2().sir_distribution().unwrap();
    let mut group = c.benchmark_group("allocate");
    for method in [
        Method::ScExact,
        Method::ScApprox,
        Method::MrcApproxNumeric,
        Method::MrcApproxClosed,
        Method::FbSc,
        Method::FbMrc,
    ] {
        for m in [2, 8] {
            let cfg = LinkConfig::new(m, 200, 1e-5, Scheme::Sc).unwrap();
            group.bench_with_input(BenchmarkId::new(method.as_str(), m), &cfg, |b, cfg| {
                b.iter(|| allocate(method, black_box(&dist), cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn lomax_sum(c: &mut Criterion) {
    c.bench_function("lomax_sum_cdf M=8 eta=12", |b| b.iter(|| lomax_sum_cdf(black_box(0.3), 8, 12)));
    c.bench_function("mrc_quantile_numeric eps=1e-9 M=8", |b| {
        b.iter(|| mrc_quantile_numeric(black_box(1e-9), 8, 8).unwrap())
    });
}

criterion_group!(benches, allocators, lomax_sum);
criterion_main!(benches);
