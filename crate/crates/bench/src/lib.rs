//! Fixtures shared by the benchmarks.

use qness_core::ising::{build_ising_model, build_m_ising_pauli, IsingSpec, Topology};
use qness_core::qpe::NessProblem;
use qness_core::sim::{Circuit, Gate, GateKind, StateVector};

pub fn ising_problem(n: usize) -> NessProblem {
    let spec = IsingSpec::new(n, Topology::Chain, 1.0, 1.0).expect("valid spec");
    NessProblem::new(build_ising_model(&spec))
        .and_then(|p| p.with_pauli_form(build_m_ising_pauli(&spec)))
        .expect("Ising model is well formed")
}

/// One layer of Hadamards followed by a CNOT ladder.
pub fn layer(width: usize) -> Circuit {
    let mut gates: Vec<Gate> = (0..width).map(|q| Gate::single(GateKind::H, q)).collect();
    gates.extend((0..width - 1).map(|q| Gate::cnot(q, q + 1)));
    Circuit::from_gates(width, gates).expect("gates fit the width")
}

pub fn plus_state(width: usize) -> StateVector {
    StateVector::zero(width).apply(&layer(width)).expect("layer fits")
}
