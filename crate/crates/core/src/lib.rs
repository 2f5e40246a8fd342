//! Classical simulation of quantum-phase-estimation based steady-state
//! estimation for Markovian open quantum systems.
//!
//! The pipeline: a [`LindbladModel`] is vectorized into a Liouvillian
//! ([`build_liouvillian`]), split into Hermitian parts and dilated into the
//! Hermitian operator `M` ([`build_m`]). Phase estimation on `e^{2πi M t0}`
//! ([`qpe::run`]) filters a prepared state onto the null space of `M`, from
//! which steady-state expectation values are read out ([`observables`]).
//! The [`oracle`] module provides the exact classical reference.

pub mod error;
pub mod ising;
pub mod linalg;
pub mod lindblad;
pub mod model_file;
pub mod observables;
pub mod operator;
pub mod oracle;
pub mod pauli;
pub mod qpe;
pub mod sim;
pub mod stats;
pub mod sweep;

pub use error::{Error, Result};
pub use lindblad::{
    build_liouvillian, build_m, single_spin_model, split_hermitian, vectorize, LindbladModel,
    NormConvention, VectorizedDensity,
};
pub use operator::{DenseOperator, Operator};
pub use pauli::{pauli_decompose, PauliAxis, PauliString, PauliSum, PauliTerm};
