//! Steady-state expectation values read out of the postselected register.
//!
//! For an observable `O` on the system, `Q = X ⊗ (I ⊗ O)` on the `2N+1`
//! register couples the two null vectors of `M`. The estimate is the ratio
//! `<Q_O> / <Q_I>`, which removes the unknown steady-state weight and the
//! Frobenius normalization at once.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, kron, CMat};
use crate::operator::{DenseOperator, Operator};
use crate::pauli::{pauli_decompose, PauliAxis, PauliString, PauliSum, DEFAULT_DECOMPOSE_CAP};
use crate::sim::{sample_index, seeded_rng, Gate, GateKind, StateVector};

pub const OBSERVABLE_HERMITICITY_TOLERANCE: f64 = 1e-12;
/// Denominators smaller than this signal an output outside the null sector.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ObservableSpec {
    op: Operator,
    label: String,
}

impl ObservableSpec {
    pub fn new(op: Operator, label: impl Into<String>) -> Result<Self> {
        let dense = op.to_dense();
        let deviation = dense.hermitian_deviation();
        if deviation > OBSERVABLE_HERMITICITY_TOLERANCE {
            return Err(Error::NotHermitian { deviation, tolerance: OBSERVABLE_HERMITICITY_TOLERANCE });
        }
        Ok(ObservableSpec { op, label: label.into() })
    }

    pub fn identity(n_sys: usize) -> Self {
        let id = PauliSum::from_terms(n_sys, [crate::pauli::PauliTerm::real(1.0, PauliString::identity(n_sys))])
            .expect("width matches");
        ObservableSpec { op: id.into(), label: "I".into() }
    }

    /// Single-site Pauli observable.
    pub fn site(n_sys: usize, site: usize, axis: PauliAxis) -> Result<Self> {
        let s = PauliString::sparse(n_sys, &[(site, axis)])?;
        let label = format!("sigma_{}{}", axis.as_char().to_ascii_lowercase(), site);
        let sum = PauliSum::from_terms(n_sys, [crate::pauli::PauliTerm::real(1.0, s)])?;
        Ok(ObservableSpec { op: sum.into(), label })
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n_sys(&self) -> usize {
        self.op.n_qubits()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let op = match &self.op {
            Operator::Pauli(p) => Operator::Pauli(p.scaled(c(factor, 0.0))),
            Operator::Dense(d) => Operator::Dense(d.scale(c(factor, 0.0))),
        };
        ObservableSpec { op, label: format!("{}*{}", factor, self.label) }
    }

    fn pauli_form(&self) -> Result<PauliSum> {
        match &self.op {
            Operator::Pauli(p) => Ok(p.clone()),
            Operator::Dense(d) => pauli_decompose(d.matrix(), DEFAULT_DECOMPOSE_CAP),
        }
    }
}

/// `Q = X ⊗ I ⊗ O` on `2N + 1` qubits.
pub fn build_q(obs: &ObservableSpec) -> DenseOperator {
    let n = obs.n_sys();
    let x = PauliString::new(vec![PauliAxis::X]).to_dense();
    let inner = kron(&CMat::identity(1 << n, 1 << n), obs.op.to_dense().matrix());
    DenseOperator::new(kron(&x, &inner)).expect("power-of-two dimension")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectationEstimate {
    pub raw_numerator: f64,
    pub raw_denominator: f64,
    pub value: f64,
    /// `None` for the exact inner-product evaluation.
    pub shots_used: Option<u64>,
    /// Delta-method standard error of `value`; `None` when exact.
    pub std_error: Option<f64>,
}

fn check_register(psi3: &StateVector, obs: &ObservableSpec) -> Result<()> {
    if psi3.n_qubits() != 2 * obs.n_sys() + 1 {
        return Err(Error::Dimension(format!(
            "observable on {} qubits needs a {}-qubit register, got {}",
            obs.n_sys(),
            2 * obs.n_sys() + 1,
            psi3.n_qubits()
        )));
    }
    Ok(())
}

fn ratio(num: f64, den: f64) -> Result<f64> {
    if den.abs() < DEGENERATE_DENOMINATOR {
        return Err(Error::DegenerateOutput(format!(
            "normalizing expectation {den:e} is below {DEGENERATE_DENOMINATOR:e}"
        )));
    }
    Ok(num / den)
}

pub fn estimate_expectation(psi3: &StateVector, obs: &ObservableSpec) -> Result<ExpectationEstimate> {
    check_register(psi3, obs)?;
    let num = psi3.expectation_dense(build_q(obs).matrix())?.re;
    let den = psi3.expectation_dense(build_q(&ObservableSpec::identity(obs.n_sys())).matrix())?.re;
    Ok(ExpectationEstimate {
        raw_numerator: num,
        raw_denominator: den,
        value: ratio(num, den)?,
        shots_used: None,
        std_error: None,
    })
}

/// Sample mean of a Pauli string measured `shots` times.
fn sample_pauli(psi: &StateVector, axes: &PauliString, shots: u64, rng: &mut crate::sim::SimRng) -> Result<f64> {
    let mut rotated = psi.clone();
    for (q, a) in axes.axes().iter().enumerate() {
        match a {
            PauliAxis::X => rotated.apply_gate(&Gate::single(GateKind::H, q))?,
            PauliAxis::Y => rotated.apply_gate(&Gate::single(GateKind::Rx(std::f64::consts::FRAC_PI_2), q))?,
            _ => {}
        }
    }
    let support = axes.support();
    let probs = rotated.marginal_probabilities(&support)?;
    let mut total: i64 = 0;
    for _ in 0..shots {
        let outcome = sample_index(&probs, rng);
        total += if outcome.count_ones() % 2 == 0 { 1 } else { -1 };
    }
    Ok(total as f64 / shots as f64)
}

/// Shot-based estimate: every Pauli string of `Q_O` and the normalizing `X`
/// on the dilation qubit is measured `shots` times in its eigenbasis.
pub fn sample_expectation(psi3: &StateVector, obs: &ObservableSpec, shots: u64, seed: u64) -> Result<ExpectationEstimate> {
    check_register(psi3, obs)?;
    if shots == 0 {
        return Err(Error::Config("shots must be at least 1".into()));
    }
    let n = obs.n_sys();
    let width = 2 * n + 1;
    let mut rng = seeded_rng(seed);
    let lift = |s: &PauliString| {
        let mut axes = vec![PauliAxis::X];
        axes.extend(std::iter::repeat_n(PauliAxis::I, n));
        axes.extend_from_slice(s.axes());
        PauliString::new(axes)
    };
    let den_axes = PauliString::sparse(width, &[(0, PauliAxis::X)])?;
    let den = sample_pauli(psi3, &den_axes, shots, &mut rng)?;
    let var_mean = |m: f64| (1.0 - m * m).max(0.0) / shots as f64;
    let den_var = var_mean(den);

    let (mut num, mut num_var) = (0.0, 0.0);
    let terms = obs.pauli_form()?;
    let mut measured = 1u64;
    for term in terms.terms() {
        let coeff = term.coefficient.re;
        if term.axes.weight() == 0 {
            // X ⊗ I is the normalizing string itself
            num += coeff * den;
            continue;
        }
        let m = sample_pauli(psi3, &lift(&term.axes), shots, &mut rng)?;
        num += coeff * m;
        num_var += coeff * coeff * var_mean(m);
        measured += 1;
    }
    let value = ratio(num, den)?;
    let std_error = (num_var / (den * den) + num * num * den_var / den.powi(4)).sqrt();
    Ok(ExpectationEstimate {
        raw_numerator: num,
        raw_denominator: den,
        value,
        shots_used: Some(shots * measured),
        std_error: Some(std_error),
    })
}

/// Purity `Tr(rho²)` and its inverse.
pub fn purity_diagnostics(rho: &DenseOperator) -> (f64, f64) {
    let p = crate::oracle::purity(rho);
    (p, 1.0 / p)
}
