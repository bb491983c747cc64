use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use subgauss_bench::{planar_metric, transport_instance};
use subgauss_core::chaining::{covering_number, CoverMethod};
use subgauss_core::tensorization::{enumerate_sequence_class, RationalMeasure, DEFAULT_CAP};
use subgauss_core::transport::{solve_transport_with, PivotRule};
use subgauss_core::{IndexSet, Sense};

fn transport(c: &mut Criterion) {
    let mut group = c.benchmark_group("transport");
    for size in [10usize, 40, 100] {
        let (cost, a, b) = transport_instance(size, size, 1);
        for rule in [PivotRule::Dantzig, PivotRule::Bland] {
            let id = BenchmarkId::new(format!("{rule:?}"), size);
            group.bench_with_input(id, &size, |bench, _| {
                bench.iter(|| solve_transport_with(black_box(&cost), &a, &b, Sense::Minimize, rule).unwrap())
            });
        }
    }
    group.finish();
}

fn enumeration(c: &mut Criterion) {
    let mu = RationalMeasure::new(IndexSet::numbered(3).unwrap(), vec![1, 1, 1]).unwrap();
    let mut group = c.benchmark_group("sequence_class");
    for n in [1usize, 2, 3] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, &n| {
            bench.iter(|| enumerate_sequence_class(black_box(&mu), n, DEFAULT_CAP).unwrap())
        });
    }
    group.finish();
}

fn covering(c: &mut Criterion) {
    let mut group = c.benchmark_group("covering");
    for n in [12usize, 16, 20] {
        let metric = planar_metric(n, 3);
        group.bench_with_input(BenchmarkId::new("exact", n), &n, |bench, _| {
            bench.iter(|| covering_number(black_box(&metric), 0.25, CoverMethod::Exact).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("greedy", n), &n, |bench, _| {
            bench.iter(|| covering_number(black_box(&metric), 0.25, CoverMethod::Greedy).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, transport, enumeration, covering);
criterion_main!(benches);
