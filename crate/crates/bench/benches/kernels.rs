use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qness_bench::{ising_problem, layer, plus_state};
use qness_core::ising::{build_ising_model, trotter_step, IsingSpec, Topology, TrotterOrder};
use qness_core::qpe::{run, trotter_power, NessProblem, QpeConfig};
use qness_core::{build_liouvillian, single_spin_model};

fn gate_kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("gate_layer");
    for width in [10, 14, 18] {
        let circ = layer(width);
        let psi = plus_state(width);
        group.bench_with_input(BenchmarkId::from_parameter(width), &width, |b, _| {
            b.iter_batched(
                || psi.clone(),
                |mut s| {
                    s.apply_circuit(black_box(&circ)).unwrap();
                    s
                },
                criterion::BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

fn liouvillian(c: &mut Criterion) {
    let mut group = c.benchmark_group("liouvillian_build");
    for n in [2, 3, 4] {
        let model = build_ising_model(&IsingSpec::new(n, Topology::Chain, 1.0, 1.0).unwrap());
        group.bench_with_input(BenchmarkId::from_parameter(n), &model, |b, m| b.iter(|| build_liouvillian(black_box(m))));
    }
    group.finish();
}

fn qpe(c: &mut Criterion) {
    let mut group = c.benchmark_group("qpe_run_single_spin");
    group.sample_size(20);
    for t in [6, 8, 10] {
        group.bench_with_input(BenchmarkId::from_parameter(t), &t, |b, &t| {
            b.iter_batched(
                // fresh problem so cached decompositions are part of the cost
                || NessProblem::new(single_spin_model(1.0)).unwrap(),
                |p| run(&p, &QpeConfig::exact(t, 0.2)).unwrap().p0,
                criterion::BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

fn trotter(c: &mut Criterion) {
    let p = ising_problem(2);
    let m = p.m_pauli().unwrap().clone();
    c.bench_function("trotter_step_circuit_n2", |b| {
        b.iter(|| trotter_step(black_box(&m), 0.2, 1.0, TrotterOrder::Second, false).unwrap())
    });
    c.bench_function("trotter_power_n2_r16", |b| {
        b.iter(|| trotter_power(black_box(&m), 0.2, TrotterOrder::Second, 16).unwrap())
    });
}

criterion_group!(benches, gate_kernels, liouvillian, qpe, trotter);
criterion_main!(benches);
