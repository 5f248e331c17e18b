use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use quic_core::direction::{newton_direction_with, SweepControl};
use quic_core::{
    chain_precision, cholesky, partition, sample_covariance, sample_gaussian, solve_quic,
    IterateState, Problem, SolverConfig, SymMatrix,
};

fn chain_problem(p: usize, lambda: f64) -> Problem {
    let truth = chain_precision(p).unwrap();
    let data = sample_gaussian(&truth, p / 2, 1).unwrap();
    Problem::uniform(sample_covariance(&data).unwrap(), lambda).unwrap()
}

fn bench_cholesky(c: &mut Criterion) {
    let mut group = c.benchmark_group("cholesky");
    for p in [50, 100, 200] {
        let a = SymMatrix::from_upper_fn(p, |i, j| {
            if i == j {
                p as f64
            } else {
                1.0 / (1.0 + (i + j) as f64)
            }
        });
        group.bench_with_input(BenchmarkId::from_parameter(p), &a, |b, a| {
            b.iter(|| cholesky(black_box(a)).unwrap())
        });
    }
    group.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("coordinate_sweep");
    for p in [100, 200] {
        let prob = chain_problem(p, 0.4);
        let st = IterateState::new(&prob, SymMatrix::identity(p)).unwrap();
        let part = partition(&st.x, &st.grad_g, prob.lambda());
        group.bench_with_input(BenchmarkId::from_parameter(p), &part.free, |b, free| {
            b.iter(|| newton_direction_with(&prob, &st, free, &SweepControl::exact(1), None))
        });
    }
    group.finish();
}

fn bench_solve(c: &mut Criterion) {
    let prob = chain_problem(100, 0.4);
    let cfg = SolverConfig::default();
    c.bench_function("solve_chain_100", |b| {
        b.iter(|| solve_quic(black_box(&prob), None, &cfg).unwrap())
    });
}

criterion_group!(benches, bench_cholesky, bench_sweep, bench_solve);
criterion_main!(benches);
