use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::pauli::PauliSum;

/// Max-norm tolerance for Hermiticity checks on assembled operators.
pub const HERMITICITY_TOLERANCE: f64 = 1e-10;

/// Explicit complex matrix on a `2^n`-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    n_qubits: usize,
    matrix: CMat,
}

impl DenseOperator {
    pub fn new(matrix: CMat) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != c || r == 0 || !r.is_power_of_two() {
            return Err(Error::Dimension(format!(
                "operator must be 2^n x 2^n, got {r}x{c}"
            )));
        }
        Ok(DenseOperator { n_qubits: r.trailing_zeros() as usize, matrix })
    }

    pub fn zeros(n_qubits: usize) -> Self {
        let d = 1 << n_qubits;
        DenseOperator { n_qubits, matrix: CMat::zeros(d, d) }
    }

    pub fn identity(n_qubits: usize) -> Self {
        DenseOperator { n_qubits, matrix: linalg::identity(1 << n_qubits) }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        DenseOperator { n_qubits: self.n_qubits, matrix: self.matrix.adjoint() }
    }

    pub fn transpose(&self) -> Self {
        DenseOperator { n_qubits: self.n_qubits, matrix: self.matrix.transpose() }
    }

    pub fn conjugate(&self) -> Self {
        DenseOperator { n_qubits: self.n_qubits, matrix: self.matrix.conjugate() }
    }

    /// `self ⊗ other`, with `self` on the more significant qubits.
    pub fn kron(&self, other: &DenseOperator) -> Self {
        DenseOperator {
            n_qubits: self.n_qubits + other.n_qubits,
            matrix: linalg::kron(&self.matrix, &other.matrix),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        DenseOperator { n_qubits: self.n_qubits, matrix: &self.matrix * factor }
    }

    pub fn hermitian_deviation(&self) -> f64 {
        linalg::hermitian_deviation(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        linalg::max_abs_diff(&self.matrix, &other.matrix)
    }

    pub fn trace(&self) -> C64 {
        linalg::trace(&self.matrix)
    }

    pub(crate) fn ensure_same_shape(&self, other: &DenseOperator) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension(format!(
                "operand widths differ: {} vs {} qubits",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(())
    }
}

impl From<&PauliSum> for DenseOperator {
    fn from(sum: &PauliSum) -> Self {
        DenseOperator { n_qubits: sum.width(), matrix: sum.to_dense() }
    }
}

impl Add for &DenseOperator {
    type Output = DenseOperator;

    fn add(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.n_qubits, rhs.n_qubits, "operator width mismatch");
        DenseOperator { n_qubits: self.n_qubits, matrix: &self.matrix + &rhs.matrix }
    }
}

impl Sub for &DenseOperator {
    type Output = DenseOperator;

    fn sub(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.n_qubits, rhs.n_qubits, "operator width mismatch");
        DenseOperator { n_qubits: self.n_qubits, matrix: &self.matrix - &rhs.matrix }
    }
}

impl Mul for &DenseOperator {
    type Output = DenseOperator;

    fn mul(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.n_qubits, rhs.n_qubits, "operator width mismatch");
        DenseOperator { n_qubits: self.n_qubits, matrix: &self.matrix * &rhs.matrix }
    }
}

/// An operator given either symbolically or as an explicit matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    Pauli(PauliSum),
    Dense(DenseOperator),
}

impl Operator {
    pub fn n_qubits(&self) -> usize {
        match self {
            Operator::Pauli(p) => p.width(),
            Operator::Dense(d) => d.n_qubits(),
        }
    }

    pub fn to_dense(&self) -> DenseOperator {
        match self {
            Operator::Pauli(p) => DenseOperator::from(p),
            Operator::Dense(d) => d.clone(),
        }
    }
}

impl From<PauliSum> for Operator {
    fn from(p: PauliSum) -> Self {
        Operator::Pauli(p)
    }
}

impl From<DenseOperator> for Operator {
    fn from(d: DenseOperator) -> Self {
        Operator::Dense(d)
    }
}
