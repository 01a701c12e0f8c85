use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use latvis_core::disc::disc_tables;
use latvis_core::fracsums::m_values;
use latvis_core::ntcore::jordan_prefix_sums;
use latvis_core::selberg::rigorous_upper_bound;
use latvis_core::visibility::{count_visible_cubes, count_visible_sieve};
use latvis_core::{build_prime_tables, LatticeBox, PointSet};

fn sieve(c: &mut Criterion) {
    c.bench_function("prime_tables_1e6", |b| {
        b.iter(|| build_prime_tables(black_box(1_000_000)).unwrap())
    });
    let mut g = c.benchmark_group("jordan_prefix");
    for k in [2u32, 3, 4] {
        g.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, &k| {
            b.iter(|| jordan_prefix_sums(k, 200_000).unwrap())
        });
    }
    g.finish();
}

fn counting(c: &mut Criterion) {
    let s: PointSet = "(0,0),(1,0)".parse().unwrap();
    let bx = LatticeBox::cube(2, 2000).unwrap();
    c.bench_function("slab_sieve_pair_2000", |b| {
        b.iter(|| count_visible_sieve(&s, &bx).unwrap())
    });
    c.bench_function("cube_scan_pair_1000", |b| {
        b.iter(|| count_visible_cubes(&s, 1000).unwrap())
    });
    let bx = LatticeBox::cube(2, 1000).unwrap();
    c.bench_function("selberg_bound_pair_1000", |b| {
        b.iter(|| rigorous_upper_bound(&s, &bx, black_box(8.0)).unwrap())
    });
}

fn sums(c: &mut Criterion) {
    c.bench_function("disc_tables_k2_1e5", |b| b.iter(|| disc_tables(2, 100_000).unwrap()));
    c.bench_function("m_values_k3_1e4", |b| b.iter(|| m_values(3, 10_000).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = sieve, counting, sums
}
criterion_main!(benches);
