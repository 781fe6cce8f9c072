use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use cvsheet_bench::{fixture, solver};
use cvsheet_core::evolution::solve_nonlinear;
use cvsheet_core::operators::{acceleration, quadratic_q};
use cvsheet_core::{FormTag, TrigPoly};

fn multiply(c: &mut Criterion) {
    let mut g = c.benchmark_group("multiply");
    for k in [32, 128, 512] {
        let (a, b) = (fixture(k, 1), fixture(k, 2));
        g.bench_with_input(BenchmarkId::from_parameter(k), &k, |bch, &k| {
            bch.iter(|| black_box(&a).multiply(black_box(&b), Some(k)))
        });
    }
    g.finish();
}

fn operators(c: &mut Criterion) {
    let mut g = c.benchmark_group("acceleration");
    for k in [32, 128] {
        let u = fixture(k, 3);
        for form in FormTag::ALL {
            g.bench_with_input(BenchmarkId::new(form.to_string(), k), &u, |bch, u| {
                bch.iter(|| acceleration(black_box(u), 1.0, form))
            });
        }
        g.bench_with_input(BenchmarkId::new("Q", k), &u, |bch, u| {
            bch.iter(|| quadratic_q(black_box(u)))
        });
    }
    g.finish();
}

fn solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_nonlinear");
    g.sample_size(10);
    for k in [16, 32] {
        let cfg = solver(k);
        let u = fixture(k, 4);
        let v = TrigPoly::zeros(k);
        g.bench_with_input(BenchmarkId::from_parameter(k), &k, |bch, _| {
            bch.iter(|| solve_nonlinear(&cfg, black_box(&u), &v).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, multiply, operators, solve);
criterion_main!(benches);
