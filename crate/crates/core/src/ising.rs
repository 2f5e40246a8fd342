//! Dissipative transverse-field Ising model and the circuits that implement
//! controlled evolution under its dilated operator `M`.
//!
//! Register layout for `M` on `2N + 1` qubits: qubit 0 is the dilation spin,
//! qubits `1..=N` carry the left tensor factor of the vectorized density
//! matrix and `N+1..=2N` the right factor. Controlled circuits put the control
//! on qubit 0 and shift the register to `1..=2N+1`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, CMat};
use crate::lindblad::LindbladModel;
use crate::pauli::{PauliAxis, PauliString, PauliSum, PauliTerm};
use crate::sim::{Circuit, Gate, GateKind, StateVector};

/// Largest Pauli weight accepted by the templates in strict mode.
pub const MAX_LOCALITY: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Chain,
    Ring,
}

impl std::str::FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(Topology::Chain),
            "ring" => Ok(Topology::Ring),
            other => Err(Error::Config(format!("unknown topology '{other}'"))),
        }
    }
}

/// `H = (J/4) Σ_<jk> Z_j Z_k + (h/2) Σ_j X_j` with unit-rate decay `σ⁻_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsingSpec {
    pub n: usize,
    pub topology: Topology,
    pub j: f64,
    pub h: f64,
}

impl IsingSpec {
    pub fn new(n: usize, topology: Topology, j: f64, h: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("Ising model needs at least one spin".into()));
        }
        if topology == Topology::Ring && n < 3 {
            return Err(Error::Config(format!(
                "a ring needs at least 3 spins, got {n}"
            )));
        }
        Ok(IsingSpec { n, topology, j, h })
    }

    /// Nearest-neighbour pairs, zero-based spin indices.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = (0..self.n.saturating_sub(1)).map(|k| (k, k + 1)).collect();
        if self.topology == Topology::Ring {
            e.push((self.n - 1, 0));
        }
        e
    }
}

fn term(width: usize, coeff: f64, ops: &[(usize, PauliAxis)]) -> PauliTerm {
    PauliTerm::real(coeff, PauliString::sparse(width, ops).expect("valid Ising term"))
}

pub fn build_ising_model(spec: &IsingSpec) -> LindbladModel {
    use PauliAxis::*;
    let n = spec.n;
    let mut ham = Vec::new();
    for (a, b) in spec.edges() {
        ham.push(term(n, spec.j / 4.0, &[(a, Z), (b, Z)]));
    }
    for k in 0..n {
        ham.push(term(n, spec.h / 2.0, &[(k, X)]));
    }
    let ham = PauliSum::from_terms(n, ham).expect("width n");
    let jumps = (0..n)
        .map(|k| {
            let x = PauliString::sparse(n, &[(k, X)]).expect("valid");
            let y = PauliString::sparse(n, &[(k, Y)]).expect("valid");
            PauliSum::from_terms(n, [PauliTerm::new(c(0.5, 0.0), x), PauliTerm::new(c(0.0, -0.5), y)])
                .expect("width n")
                .into()
        })
        .collect();
    LindbladModel::new(n, ham.into(), jumps).expect("Ising model is valid")
}

/// Symbolic 3-local form of `M` for the Ising model.
///
/// Term order: coupling terms, field terms, `Y0 (XY + YX)` cross terms,
/// `X0` dissipative terms, then the constant `-(N/2) X0`.
pub fn build_m_ising_pauli(spec: &IsingSpec) -> PauliSum {
    use PauliAxis::*;
    let n = spec.n;
    let w = 2 * n + 1;
    let left = |k: usize| k + 1;
    let right = |k: usize| k + 1 + n;
    let mut terms = Vec::new();
    for (a, b) in spec.edges() {
        terms.push(term(w, spec.j / 4.0, &[(0, Y), (right(a), Z), (right(b), Z)]));
        terms.push(term(w, -spec.j / 4.0, &[(0, Y), (left(a), Z), (left(b), Z)]));
    }
    for k in 0..n {
        terms.push(term(w, spec.h / 2.0, &[(0, Y), (right(k), X)]));
        terms.push(term(w, -spec.h / 2.0, &[(0, Y), (left(k), X)]));
    }
    for k in 0..n {
        terms.push(term(w, 0.25, &[(0, Y), (left(k), X), (right(k), Y)]));
        terms.push(term(w, 0.25, &[(0, Y), (left(k), Y), (right(k), X)]));
    }
    for k in 0..n {
        terms.push(term(w, 0.25, &[(0, X), (left(k), X), (right(k), X)]));
        terms.push(term(w, -0.25, &[(0, X), (left(k), Y), (right(k), Y)]));
        terms.push(term(w, -0.25, &[(0, X), (right(k), Z)]));
        terms.push(term(w, -0.25, &[(0, X), (left(k), Z)]));
    }
    terms.push(term(w, -(n as f64) / 2.0, &[(0, X)]));
    PauliSum::from_terms(w, terms).expect("width 2N+1")
}

/// Circuit for controlled `e^{iδP}`: control on qubit 0, `P` on qubits
/// `1..=P.width()`.
///
/// Each active qubit is rotated so that `Z` maps onto its axis, a CNOT
/// ladder collects the parity on the last active qubit, a controlled
/// `Rz(-2δ)` applies the phase, and the ladder and rotations are undone.
/// An identity string reduces to a phase gate on the control.
pub fn controlled_string_rotation(axes: &PauliString, delta: f64, strict: bool) -> Result<Circuit> {
    let weight = axes.weight();
    if strict && weight > MAX_LOCALITY {
        return Err(Error::Locality { weight, limit: MAX_LOCALITY });
    }
    let width = axes.width() + 1;
    let mut circ = Circuit::new(width);
    let active: Vec<(usize, PauliAxis)> = axes
        .support()
        .into_iter()
        .map(|q| (q + 1, axes.axes()[q]))
        .collect();
    if active.is_empty() {
        circ.push(Gate::single(GateKind::Phase(delta), 0))?;
        return Ok(circ);
    }
    // R with R† Z R = axis: Ry(-π/2) for X, Rx(π/2) for Y
    let basis_change = |axis: PauliAxis, forward: bool| -> Option<GateKind> {
        let s = if forward { 1.0 } else { -1.0 };
        match axis {
            PauliAxis::X => Some(GateKind::Ry(-s * FRAC_PI_2)),
            PauliAxis::Y => Some(GateKind::Rx(s * FRAC_PI_2)),
            _ => None,
        }
    };
    for &(q, a) in &active {
        if let Some(k) = basis_change(a, true) {
            circ.push(Gate::single(k, q))?;
        }
    }
    for pair in active.windows(2) {
        circ.push(Gate::cnot(pair[0].0, pair[1].0))?;
    }
    let last = active.last().expect("non-empty").0;
    circ.push(Gate::crz(0, last, -2.0 * delta))?;
    for pair in active.windows(2).rev() {
        circ.push(Gate::cnot(pair[0].0, pair[1].0))?;
    }
    for &(q, a) in &active {
        if let Some(k) = basis_change(a, false) {
            circ.push(Gate::single(k, q))?;
        }
    }
    Ok(circ)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TrotterOrder {
    First,
    Second,
}

impl TrotterOrder {
    pub fn as_u8(self) -> u8 {
        match self {
            TrotterOrder::First => 1,
            TrotterOrder::Second => 2,
        }
    }
}

/// One controlled product-formula step approximating
/// `C-e^{2πi t0 Δ M}`.
///
/// First order applies every term in order; second order is the symmetric
/// product with half angles everywhere except the middle term.
pub fn trotter_step(
    m: &PauliSum,
    t0: f64,
    delta_t: f64,
    order: TrotterOrder,
    strict: bool,
) -> Result<Circuit> {
    if !m.is_hermitian(1e-12) {
        return Err(Error::Config("Trotter expansion needs real Pauli coefficients".into()));
    }
    let scale = 2.0 * PI * t0 * delta_t;
    let terms = m.terms();
    let mut circ = Circuit::new(m.width() + 1);
    let mut push = |t: &PauliTerm, factor: f64| -> Result<()> {
        circ.append(&controlled_string_rotation(&t.axes, scale * factor * t.coefficient.re, strict)?)
    };
    match order {
        TrotterOrder::First => {
            for t in terms {
                push(t, 1.0)?;
            }
        }
        TrotterOrder::Second => {
            if let Some((last, rest)) = terms.split_last() {
                for t in rest {
                    push(t, 0.5)?;
                }
                push(last, 1.0)?;
                for t in rest.iter().rev() {
                    push(t, 0.5)?;
                }
            }
        }
    }
    Ok(circ)
}

/// Target-register block of a circuit controlled on qubit 0.
///
/// Fails if the circuit acts nontrivially when the control is 0.
pub fn controlled_block(circuit: &Circuit) -> Result<CMat> {
    let w = circuit.width() - 1;
    let dim = 1usize << w;
    let mut block = CMat::zeros(dim, dim);
    for col in 0..dim {
        for branch in [0usize, 1] {
            let input = (branch << w) | col;
            let mut s = StateVector::basis(w + 1, input);
            s.apply_circuit(circuit)?;
            let amps = s.amplitudes();
            if branch == 0 {
                let leak: f64 = amps
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != input)
                    .map(|(_, z)| z.norm_sqr())
                    .sum();
                if leak > 1e-24 || (amps[input] - c(1.0, 0.0)).norm() > 1e-12 {
                    return Err(Error::Consistency(
                        "controlled circuit acts on the control-0 branch".into(),
                    ));
                }
            } else {
                for row in 0..dim {
                    block[(row, col)] = amps[dim + row];
                }
                let stray: f64 = amps[..dim].iter().map(|z| z.norm_sqr()).sum();
                if stray > 1e-24 {
                    return Err(Error::Consistency("control qubit was flipped".into()));
                }
            }
        }
    }
    Ok(block)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct GateCount {
    pub single_qubit: usize,
    pub cnot: usize,
    pub controlled_rz: usize,
    /// Controlled gates other than CNOT and controlled-Rz.
    pub other_controlled: usize,
}

impl GateCount {
    pub fn total(&self) -> usize {
        self.single_qubit + self.cnot + self.controlled_rz + self.other_controlled
    }
}

pub fn count_gates(circuit: &Circuit) -> GateCount {
    circuit.gates().iter().fold(GateCount::default(), |mut acc, g| {
        match (g.control, g.kind) {
            (None, _) => acc.single_qubit += 1,
            (Some(_), GateKind::X) => acc.cnot += 1,
            (Some(_), GateKind::Rz(_)) => acc.controlled_rz += 1,
            (Some(_), _) => acc.other_controlled += 1,
        }
        acc
    })
}

/// Gate tallies of one first-order Ising Trotter step for each `N`.
pub fn gate_count_table(
    topology: Topology,
    j: f64,
    h: f64,
    ns: impl IntoIterator<Item = usize>,
) -> Result<Vec<(usize, GateCount)>> {
    ns.into_iter()
        .map(|n| {
            let spec = IsingSpec::new(n, topology, j, h)?;
            let step = trotter_step(&build_m_ising_pauli(&spec), 1.0, 1.0, TrotterOrder::First, true)?;
            Ok((n, count_gates(&step)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, HermitianEigen};
    use crate::lindblad::{build_liouvillian, build_m, single_spin_model, split_hermitian};

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn exact_controlled_exp(axes: &PauliString, delta: f64) -> CMat {
        let p = axes.to_dense();
        let eig = HermitianEigen::new(&p);
        eig.map(|v| num_complex::Complex64::from_polar(1.0, delta * v))
    }

    #[test]
    fn single_spin_is_ising_with_doubled_field() {
        for h in [0.0, 0.5, 1.3] {
            let ising = build_ising_model(&IsingSpec::new(1, Topology::Chain, 0.7, 2.0 * h).unwrap());
            let diff = build_liouvillian(&ising).max_abs_diff(&build_liouvillian(&single_spin_model(h)));
            assert!(diff < 1e-15);
        }
    }

    #[test]
    fn ising_hamiltonian_terms() {
        let two = build_ising_model(&IsingSpec::new(2, Topology::Chain, 2.0, 1.0).unwrap());
        let crate::operator::Operator::Pauli(h) = two.hamiltonian() else { panic!() };
        assert!((h.coefficient(&ps("ZZ")).re - 0.5).abs() < 1e-15);
        let ring = build_ising_model(&IsingSpec::new(3, Topology::Ring, 1.0, 0.0).unwrap());
        let crate::operator::Operator::Pauli(h) = ring.hamiltonian() else { panic!() };
        assert_eq!(h.len(), 3);
        assert!(IsingSpec::new(2, Topology::Ring, 1.0, 1.0).is_err());
        assert!(IsingSpec::new(0, Topology::Chain, 1.0, 1.0).is_err());
    }

    #[test]
    fn one_spin_dilation_terms() {
        let h = 0.8;
        let m = build_m_ising_pauli(&IsingSpec::new(1, Topology::Chain, 5.0, h).unwrap());
        let expected = [
            ("YIX", h / 2.0),
            ("YXI", -h / 2.0),
            ("YXY", 0.25),
            ("YYX", 0.25),
            ("XXX", 0.25),
            ("XYY", -0.25),
            ("XIZ", -0.25),
            ("XZI", -0.25),
            ("XII", -0.5),
        ];
        assert_eq!(m.len(), expected.len());
        for (t, (axes, coeff)) in m.terms().iter().zip(expected) {
            assert_eq!(t.axes, ps(axes));
            assert!((t.coefficient - c(coeff, 0.0)).norm() < 1e-15);
        }
        assert!(m.is_hermitian(0.0));
    }

    #[test]
    fn symbolic_dilation_matches_dense_path() {
        for (n, topo) in [(1, Topology::Chain), (2, Topology::Chain), (3, Topology::Chain), (3, Topology::Ring)] {
            let spec = IsingSpec::new(n, topo, 0.9, 1.1).unwrap();
            let model = build_ising_model(&spec);
            let (lh, la) = split_hermitian(&model).unwrap();
            let dense = build_m(&lh, &la).unwrap();
            let symbolic = build_m_ising_pauli(&spec);
            assert!(symbolic.max_weight() <= 3);
            assert!(max_abs_diff(&symbolic.to_dense(), dense.matrix()) < 1e-12, "N={n}");
        }
    }

    #[test]
    fn template_structures() {
        let a = controlled_string_rotation(&ps("XZ"), 0.3, true).unwrap();
        assert_eq!(count_gates(&a), GateCount { single_qubit: 2, cnot: 2, controlled_rz: 1, other_controlled: 0 });
        let b = controlled_string_rotation(&ps("YX"), 0.3, true).unwrap();
        assert_eq!(count_gates(&b), GateCount { single_qubit: 4, cnot: 2, controlled_rz: 1, other_controlled: 0 });
        let cc = controlled_string_rotation(&ps("YXY"), 0.3, true).unwrap();
        assert_eq!(count_gates(&cc), GateCount { single_qubit: 6, cnot: 4, controlled_rz: 1, other_controlled: 0 });
        assert_eq!(count_gates(&Circuit::new(3)), GateCount::default());
    }

    #[test]
    fn templates_match_exact_exponential() {
        for (axes, delta) in [("XZ", 0.3), ("YX", -1.2), ("YXY", 0.77), ("IXI", 2.0), ("Z", 0.1), ("II", 0.4)] {
            let p = ps(axes);
            let circ = controlled_string_rotation(&p, delta, true).unwrap();
            let block = controlled_block(&circ).unwrap();
            assert!(max_abs_diff(&block, &exact_controlled_exp(&p, delta)) < 1e-12, "{axes}");
        }
    }

    #[test]
    fn zero_angle_template_is_identity() {
        let circ = controlled_string_rotation(&ps("XZY"), 0.0, true).unwrap();
        let u = StateVector::circuit_unitary(&circ).unwrap();
        assert!(max_abs_diff(&u, &CMat::identity(16, 16)) < 1e-12);
    }

    #[test]
    fn strict_mode_rejects_weight_four() {
        assert!(matches!(
            controlled_string_rotation(&ps("XXXX"), 0.1, true),
            Err(Error::Locality { weight: 4, limit: 3 })
        ));
        assert!(controlled_string_rotation(&ps("XXXX"), 0.1, false).is_ok());
    }

    #[test]
    fn single_term_step_is_exact() {
        let m = PauliSum::from_terms(2, [PauliTerm::real(0.7, ps("XY"))]).unwrap();
        for order in [TrotterOrder::First, TrotterOrder::Second] {
            let step = trotter_step(&m, 0.2, 0.5, order, true).unwrap();
            let block = controlled_block(&step).unwrap();
            let exact = exact_controlled_exp(&ps("XY"), 2.0 * PI * 0.2 * 0.5 * 0.7);
            assert!(max_abs_diff(&block, &exact) < 1e-12);
        }
    }

    #[test]
    fn gate_counts_grow_linearly() {
        let table = gate_count_table(Topology::Chain, 1.0, 1.0, 2..=6).unwrap();
        for w in table.windows(2) {
            let d_single = w[1].1.single_qubit - w[0].1.single_qubit;
            let d_cnot = w[1].1.cnot - w[0].1.cnot;
            assert_eq!(d_single, 40);
            assert_eq!(d_cnot, 32);
        }
        // one controlled-Rz per Pauli term
        let (n, counts) = table[0];
        let terms = build_m_ising_pauli(&IsingSpec::new(n, Topology::Chain, 1.0, 1.0).unwrap()).len();
        assert_eq!(counts.controlled_rz, terms);
    }
}
