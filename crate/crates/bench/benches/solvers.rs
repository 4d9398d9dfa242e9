use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cake_bench::{instances, scheduling};
use cake_core::discretize::{maximize_rho_mean, DEFAULT_DISCRETIZE_BUDGET};
use cake_core::exhaustive::{exhaustive_nsw, DEFAULT_EXHAUSTIVE_BUDGET};
use cake_core::jisp::local_ratio_solve;
use cake_core::knife::{alg_three_ef, alg_two_ef};
use cake_core::oracle::{grid_optimal, Welfare, DEFAULT_ORACLE_BUDGET};
use cake_core::rational::{int, rat};

fn knife(c: &mut Criterion) {
    let mut g = c.benchmark_group("knife");
    for n in [2, 4, 6] {
        let corpus = instances(n, 4);
        g.bench_with_input(BenchmarkId::new("three_ef", n), &corpus, |b, corpus| {
            b.iter(|| corpus.iter().map(|i| alg_three_ef(black_box(i), &rat(1, 5)).unwrap().iterations).sum::<u64>())
        });
        g.bench_with_input(BenchmarkId::new("two_ef", n), &corpus, |b, corpus| {
            b.iter(|| corpus.iter().map(|i| alg_two_ef(black_box(i), &rat(1, 5)).unwrap().iterations).sum::<u64>())
        });
    }
    g.finish();
}

fn scheduling_bench(c: &mut Criterion) {
    let mut g = c.benchmark_group("local_ratio");
    for (jobs, points) in [(4, 16), (8, 64)] {
        let inst = scheduling(jobs, points);
        g.bench_with_input(BenchmarkId::from_parameter(format!("{jobs}x{points}")), &inst, |b, inst| {
            b.iter(|| local_ratio_solve(black_box(inst)))
        });
    }
    g.finish();
}

fn welfare(c: &mut Criterion) {
    let mut g = c.benchmark_group("welfare");
    g.sample_size(10);
    let pair = &instances(2, 1)[0];
    let triple = &instances(3, 1)[0];
    g.bench_function("rho_mean_n2_rho1", |b| {
        b.iter(|| maximize_rho_mean(black_box(pair), &int(1), &rat(1, 2), DEFAULT_DISCRETIZE_BUDGET).unwrap())
    });
    g.bench_function("exhaustive_n3_alpha2", |b| {
        b.iter(|| exhaustive_nsw(black_box(triple), &int(2), DEFAULT_EXHAUSTIVE_BUDGET).unwrap())
    });
    g.bench_function("grid_oracle_n3_nsw_1_32", |b| {
        b.iter(|| grid_optimal(black_box(triple), &Welfare::Nsw, &rat(1, 32), DEFAULT_ORACLE_BUDGET).unwrap())
    });
    g.finish();
}

criterion_group!(benches, knife, scheduling_bench, welfare);
criterion_main!(benches);
