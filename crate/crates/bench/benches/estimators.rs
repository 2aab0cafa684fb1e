use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lgfilter::dobrovidov::{dobrovidov_direct, dobrovidov_recursive, grid_bayes_oracle, GridSpec};
use lgfilter::normalcorr::{
    build_covariances, invert_cov_with, normalcorr_estimate_with, CoefficientPath, PsiMode,
};
use lgfilter::{dense_invert, kalman_filter, normalcorr_estimate};
use lgfilter_bench::{dense_all_prefix, fixture};

fn filters(c: &mut Criterion) {
    let mut group = c.benchmark_group("filter");
    for n in [100, 1000] {
        let (p, xs) = fixture(n);
        group.bench_with_input(BenchmarkId::new("kalman", n), &xs, |b, xs| {
            b.iter(|| kalman_filter(&p, black_box(xs)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("dobrovidov-recursive", n), &xs, |b, xs| {
            b.iter(|| dobrovidov_recursive(&p, black_box(xs)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("dobrovidov-direct", n), &xs, |b, xs| {
            b.iter(|| dobrovidov_direct(&p, black_box(xs)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("normalcorr", n), &xs, |b, xs| {
            b.iter(|| normalcorr_estimate(&p, black_box(xs)).unwrap())
        });
    }
    let (p, xs) = fixture(100);
    group.bench_function("normalcorr-psi/100", |b| {
        b.iter(|| normalcorr_estimate_with(&p, black_box(&xs), CoefficientPath::Psi).unwrap())
    });
    group.sample_size(10);
    let (p, xs) = fixture(20);
    group.bench_function("grid-oracle-2001/20", |b| {
        b.iter(|| grid_bayes_oracle(&p, black_box(&xs), GridSpec::default()).unwrap())
    });
    group.finish();
}

fn inversion(c: &mut Criterion) {
    let mut group = c.benchmark_group("invert");
    let (p, _) = fixture(1);
    for n in [10, 50, 100] {
        group.bench_with_input(BenchmarkId::new("structured", n), &n, |b, &n| {
            b.iter(|| invert_cov_with(&p, black_box(n), PsiMode::Direct).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("structured-scaled", n), &n, |b, &n| {
            b.iter(|| invert_cov_with(&p, black_box(n), PsiMode::Scaled).unwrap())
        });
        let cov = build_covariances(&p, n).unwrap();
        group.bench_with_input(BenchmarkId::new("dense", n), &cov.d_xx, |b, m| {
            b.iter(|| dense_invert(black_box(m)).unwrap())
        });
    }
    group.finish();
}

fn all_prefix(c: &mut Criterion) {
    let mut group = c.benchmark_group("all-prefix");
    group.sample_size(10);
    for n in [25, 50, 100] {
        let (p, xs) = fixture(n);
        group.bench_with_input(BenchmarkId::new("structured", n), &xs, |b, xs| {
            b.iter(|| normalcorr_estimate(&p, black_box(xs)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("dense", n), &xs, |b, xs| {
            b.iter(|| dense_all_prefix(&p, black_box(xs)))
        });
    }
    group.finish();
}

criterion_group!(benches, filters, inversion, all_prefix);
criterion_main!(benches);
