//! TOML model description files.
//!
//! ```toml
//! n_sys = 1
//!
//! [[hamiltonian]]
//! coeff = 1.0
//! axes = "X"
//!
//! [[jumps]]
//! terms = [
//!     { coeff = 0.5, axes = "X" },
//!     { coeff = [0.0, -0.5], axes = "Y" },
//! ]
//!
//! [[jumps]]
//! matrix = [[[0.0, 0.0], [0.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]]
//! ```
//!
//! `coeff` is a real number or a `[re, im]` pair. Axes strings list one Pauli
//! per qubit, qubit 0 first. A jump is either a Pauli sum (`terms`) or a dense
//! row-major matrix of `[re, im]` entries (`matrix`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat};
use crate::lindblad::LindbladModel;
use crate::operator::{DenseOperator, Operator};
use crate::pauli::{PauliString, PauliSum, PauliTerm};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub n_sys: usize,
    #[serde(default)]
    pub hamiltonian: Vec<TermSpec>,
    #[serde(default)]
    pub jumps: Vec<OperatorSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coeff: Coefficient,
    pub axes: String,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Coefficient {
    Real(f64),
    Complex([f64; 2]),
}

impl Coefficient {
    fn value(self) -> num_complex::Complex64 {
        match self {
            Coefficient::Real(r) => c(r, 0.0),
            Coefficient::Complex([re, im]) => c(re, im),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum OperatorSpec {
    Terms { terms: Vec<TermSpec> },
    Matrix { matrix: Vec<Vec<[f64; 2]>> },
}

fn pauli_sum(n_sys: usize, terms: &[TermSpec]) -> Result<PauliSum> {
    let parsed = terms
        .iter()
        .map(|t| {
            let axes: PauliString = t.axes.parse()?;
            Ok(PauliTerm::new(t.coeff.value(), axes))
        })
        .collect::<Result<Vec<_>>>()?;
    PauliSum::from_terms(n_sys, parsed)
}

impl OperatorSpec {
    fn to_operator(&self, n_sys: usize) -> Result<Operator> {
        match self {
            OperatorSpec::Terms { terms } => Ok(Operator::Pauli(pauli_sum(n_sys, terms)?)),
            OperatorSpec::Matrix { matrix } => {
                let d = matrix.len();
                if matrix.iter().any(|row| row.len() != d) {
                    return Err(Error::ModelFile("jump matrix must be square".into()));
                }
                let m = CMat::from_fn(d, d, |i, j| c(matrix[i][j][0], matrix[i][j][1]));
                Ok(Operator::Dense(DenseOperator::new(m)?))
            }
        }
    }
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ModelFile(e.to_string()))
    }

    pub fn to_model(&self) -> Result<LindbladModel> {
        let ham = pauli_sum(self.n_sys, &self.hamiltonian)?;
        if !ham.is_hermitian(1e-12) {
            return Err(Error::ModelFile("Hamiltonian coefficients must be real".into()));
        }
        let jumps = self
            .jumps
            .iter()
            .map(|j| j.to_operator(self.n_sys))
            .collect::<Result<Vec<_>>>()?;
        LindbladModel::new(self.n_sys, ham.into(), jumps)
    }
}

impl LindbladModel {
    /// Parses a TOML model description.
    pub fn from_toml(text: &str) -> Result<Self> {
        ModelFile::parse(text)?.to_model()
    }
}
