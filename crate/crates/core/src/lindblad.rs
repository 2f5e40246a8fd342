//! Lindblad models and their vectorized (superoperator) form.
//!
//! Density matrices are vectorized by stacking columns: the amplitude at
//! composite index `k * 2^N + j` is `rho[j][k]`. With qubit 0 as the most
//! significant bit this puts the column index on the left tensor factor, so
//! `vec(A rho B) = (B^T ⊗ A) vec(rho)` and in particular
//! `vec(O rho) = (I ⊗ O) vec(rho)`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec};
use crate::operator::{DenseOperator, Operator, HERMITICITY_TOLERANCE};
use crate::pauli::{PauliString, PauliSum, PauliTerm};

/// Open-system model: Hamiltonian plus jump operators on `n_sys` qubits.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    n_sys: usize,
    hamiltonian: Operator,
    jumps: Vec<Operator>,
}

impl LindbladModel {
    pub fn new(n_sys: usize, hamiltonian: Operator, jumps: Vec<Operator>) -> Result<Self> {
        if n_sys == 0 {
            return Err(Error::Dimension("model needs at least one qubit".into()));
        }
        for (what, op) in std::iter::once(("hamiltonian", &hamiltonian))
            .chain(jumps.iter().map(|j| ("jump operator", j)))
        {
            if op.n_qubits() != n_sys {
                return Err(Error::Dimension(format!(
                    "{what} acts on {} qubits, model has {n_sys}",
                    op.n_qubits()
                )));
            }
        }
        let deviation = hamiltonian.to_dense().hermitian_deviation();
        if deviation > HERMITICITY_TOLERANCE {
            return Err(Error::NotHermitian { deviation, tolerance: HERMITICITY_TOLERANCE });
        }
        Ok(LindbladModel { n_sys, hamiltonian, jumps })
    }

    pub fn n_sys(&self) -> usize {
        self.n_sys
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[Operator] {
        &self.jumps
    }
}

/// `H = h X` on one spin with decay `A = σ⁻ = (X - iY)/2`.
pub fn single_spin_model(h: f64) -> LindbladModel {
    let x: PauliString = "X".parse().expect("valid axes");
    let y: PauliString = "Y".parse().expect("valid axes");
    let ham = PauliSum::from_terms(1, [PauliTerm::real(h, x.clone())]).expect("width 1");
    let lower = PauliSum::from_terms(
        1,
        [PauliTerm::new(c(0.5, 0.0), x), PauliTerm::new(c(0.0, -0.5), y)],
    )
    .expect("width 1");
    LindbladModel::new(1, ham.into(), vec![lower.into()]).expect("single-spin model is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormConvention {
    /// Euclidean norm one; entries are `rho_jk / ||rho||_F`.
    UnitVector,
    /// Entries are the matrix entries of a trace-one density matrix.
    TraceOne,
}

/// A density matrix in column-stacked vector form.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorizedDensity {
    n_sys: usize,
    amplitudes: CVec,
    convention: NormConvention,
}

impl VectorizedDensity {
    pub fn from_amplitudes(
        n_sys: usize,
        amplitudes: CVec,
        convention: NormConvention,
    ) -> Result<Self> {
        if amplitudes.len() != 1 << (2 * n_sys) {
            return Err(Error::Dimension(format!(
                "vectorized density on {n_sys} qubits needs {} amplitudes, got {}",
                1usize << (2 * n_sys),
                amplitudes.len()
            )));
        }
        Ok(VectorizedDensity { n_sys, amplitudes, convention })
    }

    pub fn n_sys(&self) -> usize {
        self.n_sys
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn convention(&self) -> NormConvention {
        self.convention
    }

    /// Rescaled to unit Euclidean norm.
    pub fn to_unit_vector(&self) -> Self {
        let norm = self.amplitudes.norm();
        VectorizedDensity {
            n_sys: self.n_sys,
            amplitudes: &self.amplitudes / c(norm, 0.0),
            convention: NormConvention::UnitVector,
        }
    }

    /// Rescaled so the devectorized matrix has trace one.
    pub fn to_trace_one(&self) -> Result<Self> {
        let tr = self.devectorize().trace();
        if tr.norm() < f64::MIN_POSITIVE.sqrt() {
            return Err(Error::InvalidDensity("vector has zero trace".into()));
        }
        Ok(VectorizedDensity {
            n_sys: self.n_sys,
            amplitudes: &self.amplitudes / tr,
            convention: NormConvention::TraceOne,
        })
    }

    /// Matrix whose entries are the amplitudes, with no rescaling.
    pub fn devectorize(&self) -> DenseOperator {
        let d = 1 << self.n_sys;
        // column-major storage is exactly the column-stacking order
        let m = CMat::from_column_slice(d, d, self.amplitudes.as_slice());
        DenseOperator::new(m).expect("power-of-two dimension")
    }
}

/// Column-stacks `rho` into a trace-one-convention vector.
pub fn vectorize(rho: &DenseOperator) -> VectorizedDensity {
    VectorizedDensity {
        n_sys: rho.n_qubits(),
        amplitudes: CVec::from_column_slice(rho.matrix().as_slice()),
        convention: NormConvention::TraceOne,
    }
}

fn jump_pieces(model: &LindbladModel) -> Vec<(DenseOperator, DenseOperator, DenseOperator)> {
    // (A, A^dagger A, A^T A^*) for every jump
    model
        .jumps
        .iter()
        .map(|j| {
            let a = j.to_dense();
            let ada = &a.adjoint() * &a;
            let at_ac = &a.transpose() * &a.conjugate();
            (a, ada, at_ac)
        })
        .collect()
}

/// Vectorized Liouvillian on `2N` qubits:
/// `-i(I⊗H - H^T⊗I) - 1/2 Σ (I⊗A†A + A^T A^*⊗I - 2 A^*⊗A)`.
pub fn build_liouvillian(model: &LindbladModel) -> DenseOperator {
    let n = model.n_sys;
    let id = DenseOperator::identity(n);
    let h = model.hamiltonian.to_dense();
    let minus_i = c(0.0, -1.0);

    let mut l = (&id.kron(&h) - &h.transpose().kron(&id)).scale(minus_i);
    for (a, ada, at_ac) in jump_pieces(model) {
        let diss = &(&id.kron(&ada) + &at_ac.kron(&id)) - &a.conjugate().kron(&a).scale(c(2.0, 0.0));
        l = &l - &diss.scale(c(0.5, 0.0));
    }
    l
}

/// Hermitian parts `(L_H, L_A)` with `L = L_H - i L_A`, each assembled
/// directly from the Hamiltonian and jump operators.
pub fn split_hermitian(model: &LindbladModel) -> Result<(DenseOperator, DenseOperator)> {
    let n = model.n_sys;
    let id = DenseOperator::identity(n);
    let h = model.hamiltonian.to_dense();

    let mut l_a = &id.kron(&h) - &h.transpose().kron(&id);
    let mut l_h = DenseOperator::zeros(2 * n);
    for (a, ada, at_ac) in jump_pieces(model) {
        let ac_a = a.conjugate().kron(&a);
        let at_ad = a.transpose().kron(&a.adjoint());
        l_a = &l_a + &(&ac_a - &at_ad).scale(c(0.0, 0.5));
        let sum = &(&ac_a + &at_ad) - &(&id.kron(&ada) + &at_ac.kron(&id));
        l_h = &l_h + &sum.scale(c(0.5, 0.0));
    }
    for (name, op) in [("L_H", &l_h), ("L_A", &l_a)] {
        let dev = op.hermitian_deviation();
        if dev > HERMITICITY_TOLERANCE {
            return Err(Error::Consistency(format!(
                "{name} deviates from Hermitian by {dev:e}"
            )));
        }
    }
    Ok((l_h, l_a))
}

/// Hermitian dilation `M = X ⊗ L_H + Y ⊗ L_A` on `2N + 1` qubits.
///
/// The upper-right block is `L` and the lower-left block is `L†`.
pub fn build_m(l_h: &DenseOperator, l_a: &DenseOperator) -> Result<DenseOperator> {
    l_h.ensure_same_shape(l_a)?;
    for op in [l_h, l_a] {
        let deviation = op.hermitian_deviation();
        if deviation > HERMITICITY_TOLERANCE {
            return Err(Error::NotHermitian { deviation, tolerance: HERMITICITY_TOLERANCE });
        }
    }
    let x = DenseOperator::from(&pauli_1q("X"));
    let y = DenseOperator::from(&pauli_1q("Y"));
    Ok(&x.kron(l_h) + &y.kron(l_a))
}

fn pauli_1q(axis: &str) -> PauliSum {
    PauliSum::from_terms(1, [PauliTerm::real(1.0, axis.parse().expect("axis"))]).expect("width 1")
}

/// `|I>`: the vectorized identity scaled to unit norm.
pub fn normalized_identity_vector(n_sys: usize) -> CVec {
    let d = 1usize << n_sys;
    let mut v = CVec::zeros(d * d);
    let amp = c(1.0 / (d as f64).sqrt(), 0.0);
    for j in 0..d {
        v[j * d + j] = amp;
    }
    v
}

#[cfg(test)]
pub(crate) fn apply(op: &DenseOperator, v: &CVec) -> CVec {
    op.matrix() * v
}

/// Scalar helper used by tests and diagnostics.
pub fn inner(a: &CVec, b: &CVec) -> C64 {
    a.dotc(b)
}
