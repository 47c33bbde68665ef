use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use cutoff_bench::benchmark_setting;
use cutoff_core::advisor::{objective, optimal_threshold, policy_curve};
use cutoff_core::effort::solve_effort;
use cutoff_core::model::{AbilityBranch, Branch, ComplexityBelief, Regime, TestNoise};
use cutoff_core::numerics::{lambert_w0, log_space};
use cutoff_core::partition::{lambda_star, u_pool, SeparatingKnob};

fn effort(c: &mut Criterion) {
    let s = benchmark_setting();
    let pass = AbilityBranch::new(Branch::Pass, 0.5, TestNoise::NOISELESS).unwrap();
    let mut g = c.benchmark_group("effort");
    for (name, belief) in [
        ("prior", s.prim.prior()),
        ("point_mass", ComplexityBelief::PointMass { t: 0.2 }),
        ("trunc_exp", ComplexityBelief::TruncExp { lambda: 1.0, a: 0.1, b: 0.6 }),
    ] {
        g.bench_function(name, |b| b.iter(|| solve_effort(black_box(&pass), &belief, s.tech, &s.prim).unwrap()));
    }
    g.finish();
}

fn advisor(c: &mut Criterion) {
    let s = benchmark_setting();
    let mut g = c.benchmark_group("advisor");
    g.bench_function("objective", |b| b.iter(|| objective(black_box(0.2), 0.5, &Regime::Naive, &s).unwrap()));
    g.bench_function("optimal_threshold_naive", |b| {
        b.iter(|| optimal_threshold(black_box(0.3), &Regime::Naive, &s).unwrap())
    });
    g.bench_function("optimal_threshold_separating", |b| {
        b.iter(|| optimal_threshold(black_box(0.3), &Regime::Separating, &s).unwrap())
    });
    let grid = log_space(1e-4, 10.0, 60);
    g.sample_size(10);
    g.bench_function("policy_curve_naive_60", |b| b.iter(|| policy_curve(&grid, &Regime::Naive, &s).unwrap()));
    g.finish();
}

fn partition(c: &mut Criterion) {
    let knob = SeparatingKnob::new(0.5).unwrap();
    let mut g = c.benchmark_group("partition");
    g.bench_function("lambert_w0", |b| b.iter(|| lambert_w0(black_box(3.7)).unwrap()));
    g.bench_function("u_pool", |b| b.iter(|| u_pool(black_box(0.9), 1.0, 2.5).unwrap()));
    g.bench_function("lambda_star", |b| b.iter(|| lambda_star(black_box(1.0), 2.0, knob, None).unwrap()));
    g.finish();
}

criterion_group!(benches, effort, advisor, partition);
criterion_main!(benches);
