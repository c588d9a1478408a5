use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ulc_bench::{desk_search, quadratic_boxes};
use ulc_core::lattice::min_product;
use ulc_core::optimize::solve;
use ulc_core::productset::{analyze, ProductSetInstance};
use ulc_core::ratcore::{cf_expand, rat};
use ulc_core::sarith::{s_norm, SSpec};
use ulc_core::witness::find_witnesses;
use ulc_core::zaremba::zaremba_numerators;
use ulc_core::BigInt;

fn ratcore(c: &mut Criterion) {
    let x = rat(832_040, 1_346_269);
    c.bench_function("cf_expand/fibonacci", |b| b.iter(|| cf_expand(black_box(&x))));
    let set: SSpec = "exclude:3".parse().unwrap();
    let n = BigInt::from(2u64.pow(20) * 3u64.pow(7) * 5);
    c.bench_function("s_norm/cofinite", |b| b.iter(|| s_norm(black_box(&n), &set).unwrap()));
}

fn zaremba(c: &mut Criterion) {
    let mut g = c.benchmark_group("zaremba_numerators");
    for q in [1009u64, 10_007, 100_003] {
        g.bench_with_input(BenchmarkId::from_parameter(q), &q, |b, &q| b.iter(|| zaremba_numerators(q, 5)));
    }
    g.finish();
}

fn lattice(c: &mut Criterion) {
    let mut g = c.benchmark_group("min_product");
    g.sample_size(20);
    for q_max in [10_000u64, 1_000_000, 100_000_000] {
        let boxes = quadratic_boxes(q_max);
        let n = BigInt::from(q_max);
        g.bench_with_input(BenchmarkId::from_parameter(q_max), &boxes, |b, boxes| b.iter(|| min_product(boxes, &n, |_| true).unwrap()));
    }
    g.finish();
}

fn witness(c: &mut Criterion) {
    let cfg = desk_search(50, 10_000, 1000);
    c.bench_function("find_witnesses/desk", |b| b.iter(|| find_witnesses(black_box(&cfg)).unwrap()));
}

fn productset(c: &mut Criterion) {
    let inst = ProductSetInstance::middle_third(293, zaremba_numerators(293, 5).numerators).unwrap();
    c.bench_function("productset/analyze_293", |b| b.iter(|| analyze(black_box(&inst)).unwrap()));
}

fn optimize(c: &mut Criterion) {
    c.bench_function("optimize/solve_50", |b| b.iter(|| solve(black_box(50))));
}

criterion_group!(benches, ratcore, zaremba, lattice, witness, productset, optimize);
criterion_main!(benches);
