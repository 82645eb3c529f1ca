use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use heomflux_bench::{engine_operator, spin_boson_operator};
use heomflux_core::bath::{auto_pade_terms, pade_decompose};
use heomflux_core::hierarchy::propagate::Propagator;
use heomflux_core::BathSpec;

fn rhs(c: &mut Criterion) {
    let mut g = c.benchmark_group("rhs");
    for depth in [4, 8] {
        let op = spin_boson_operator(0.1, 3, depth, 1);
        let x = op.maximally_mixed();
        let mut out = vec![Default::default(); op.state_len()];
        g.bench_with_input(
            BenchmarkId::new("spin_boson", op.table().len()),
            &x,
            |b, x| b.iter(|| op.rhs_into(0.0, black_box(x.data()), &mut out)),
        );
    }
    let op = engine_operator(6, 1);
    let x = op.maximally_mixed();
    let mut out = vec![Default::default(); op.state_len()];
    g.bench_with_input(BenchmarkId::new("engine", op.table().len()), &x, |b, x| {
        b.iter(|| op.rhs_into(0.3, black_box(x.data()), &mut out))
    });
    g.finish();
}

fn rk4_step(c: &mut Criterion) {
    let op = spin_boson_operator(0.1, 3, 6, 1);
    let mut x = op.maximally_mixed();
    let mut prop = Propagator::new(&op);
    c.bench_function("rk4_step/spin_boson_depth6", |b| {
        b.iter(|| prop.step(&mut x, 0.01).unwrap())
    });
}

fn decomposition(c: &mut Criterion) {
    let spec = BathSpec::new(1.0, 2.0, 0.1, 10).unwrap();
    c.bench_function("pade_decompose/J10", |b| {
        b.iter(|| pade_decompose(black_box(&spec)).unwrap())
    });
    let spec = BathSpec::new(1.0, 2.0, 1.0, 0).unwrap();
    let mut g = c.benchmark_group("auto_pade_terms");
    g.sample_size(10);
    g.bench_function("T1", |b| {
        b.iter(|| auto_pade_terms(black_box(&spec), 1e-6, 64).unwrap())
    });
    g.finish();
}

criterion_group!(benches, rhs, rk4_step, decomposition);
criterion_main!(benches);
