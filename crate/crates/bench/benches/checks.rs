use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use quiver_spectra::checks::{self, CheckConfig, CheckKind};
use quiver_spectra::families::{self, Family, SearchSpec};
use quiver_spectra_bench::{desk_quiver, half_dense_simple};

fn bench_single_checks(c: &mut Criterion) {
    let cfg = CheckConfig::default();
    let q = desk_quiver();
    c.bench_function("brouwer_desk", |b| {
        b.iter(|| checks::check_brouwer(black_box(&q), &cfg).unwrap())
    });
    let simple = half_dense_simple(10);
    c.bench_function("connection_identities_n10", |b| {
        b.iter(|| checks::check_connection(black_box(&simple), &cfg).unwrap())
    });
    let c16 = families::cycle(16).unwrap();
    c.bench_function("certificate_cycle16", |b| {
        b.iter(|| checks::brouwer_certificate(black_box(&c16), &cfg).unwrap())
    });
}

fn bench_exhaustive(c: &mut Criterion) {
    let mut group = c.benchmark_group("exhaustive");
    group.sample_size(10);
    group.bench_function("brouwer_n5_all_1024", |b| {
        b.iter(|| {
            let spec = SearchSpec {
                family: Family::Enumerate { n: 5 },
                seed: 0,
                trials: 0,
                checks: vec![CheckKind::Brouwer],
                config: CheckConfig::default(),
                s3_stat: false,
            };
            families::search(black_box(&spec)).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, bench_single_checks, bench_exhaustive);
criterion_main!(benches);
