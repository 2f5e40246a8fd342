//! Phase-estimation filter onto the null space of `M`.
//!
//! Registers: qubits `0..t` form the phase register (qubit 0 most
//! significant), qubits `t..t+2N+1` hold the dilated system state.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ising::{controlled_block, trotter_step, TrotterOrder};
use crate::linalg::{c, CMat, CVec, HermitianEigen};
use crate::lindblad::{
    build_liouvillian, build_m, normalized_identity_vector, split_hermitian, vectorize,
    LindbladModel, NormConvention, VectorizedDensity,
};
use crate::operator::DenseOperator;
use crate::oracle::{self, clean_density, NessSolution, NULL_TOLERANCE};
use crate::pauli::{pauli_decompose, PauliSum, DEFAULT_DECOMPOSE_CAP};
use crate::sim::{inverse_qft, seeded_rng, Circuit, Gate, GateKind, StateVector};

pub const DEFAULT_MAX_ATTEMPTS: usize = 16;
/// Tolerance when comparing a supplied Pauli form of `M` to the dense one.
const PAULI_FORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleMode {
    Exact,
    Trotter { order: TrotterOrder, steps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PostselectMode {
    ExactProjection,
    Sampled { seed: u64, max_attempts: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QpeConfig {
    pub t: usize,
    pub t0: f64,
    pub oracle: OracleMode,
    pub postselect: PostselectMode,
}

impl QpeConfig {
    pub fn exact(t: usize, t0: f64) -> Self {
        QpeConfig { t, t0, oracle: OracleMode::Exact, postselect: PostselectMode::ExactProjection }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t == 0 {
            return Err(Error::Config("t must be at least 1".into()));
        }
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::Config(format!("t0 must be positive, got {}", self.t0)));
        }
        if let OracleMode::Trotter { steps: 0, .. } = self.oracle {
            return Err(Error::Config("Trotter step count must be at least 1".into()));
        }
        if let PostselectMode::Sampled { max_attempts: 0, .. } = self.postselect {
            return Err(Error::Config("max_attempts must be at least 1".into()));
        }
        Ok(())
    }
}

/// A model with its Liouvillian, Hermitian parts and dilation precomputed.
#[derive(Debug)]
pub struct NessProblem {
    model: LindbladModel,
    liouvillian: DenseOperator,
    l_h: DenseOperator,
    l_a: DenseOperator,
    m: DenseOperator,
    m_pauli: OnceLock<std::result::Result<PauliSum, String>>,
    m_eigen: OnceLock<HermitianEigen>,
    ness: OnceLock<std::result::Result<NessSolution, String>>,
}

impl NessProblem {
    pub fn new(model: LindbladModel) -> Result<Self> {
        let liouvillian = build_liouvillian(&model);
        let (l_h, l_a) = split_hermitian(&model)?;
        let m = build_m(&l_h, &l_a)?;
        Ok(NessProblem {
            model,
            liouvillian,
            l_h,
            l_a,
            m,
            m_pauli: OnceLock::new(),
            m_eigen: OnceLock::new(),
            ness: OnceLock::new(),
        })
    }

    /// Attaches a symbolic form of `M`, checked against the dense one.
    pub fn with_pauli_form(self, m_pauli: PauliSum) -> Result<Self> {
        let diff = crate::linalg::max_abs_diff(&m_pauli.to_dense(), self.m.matrix());
        if diff > PAULI_FORM_TOLERANCE {
            return Err(Error::Consistency(format!(
                "Pauli form of M deviates from the dense operator by {diff:e}"
            )));
        }
        let cell = OnceLock::new();
        let _ = cell.set(Ok(m_pauli));
        Ok(NessProblem { m_pauli: cell, ..self })
    }

    pub fn model(&self) -> &LindbladModel {
        &self.model
    }

    pub fn n_sys(&self) -> usize {
        self.model.n_sys()
    }

    pub fn liouvillian(&self) -> &DenseOperator {
        &self.liouvillian
    }

    pub fn l_h(&self) -> &DenseOperator {
        &self.l_h
    }

    pub fn l_a(&self) -> &DenseOperator {
        &self.l_a
    }

    pub fn m(&self) -> &DenseOperator {
        &self.m
    }

    /// Pauli form of `M`, decomposing the dense operator if none was given.
    pub fn m_pauli(&self) -> Result<&PauliSum> {
        self.m_pauli
            .get_or_init(|| {
                pauli_decompose(self.m.matrix(), DEFAULT_DECOMPOSE_CAP).map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|e| Error::Config(format!("no Pauli form of M available: {e}")))
    }

    pub fn m_eigen(&self) -> &HermitianEigen {
        self.m_eigen.get_or_init(|| HermitianEigen::new(self.m.matrix()))
    }

    /// Exact steady state from the spectral oracle, cached.
    pub fn ness(&self) -> Result<&NessSolution> {
        self.ness
            .get_or_init(|| oracle::solve_ness(&self.liouvillian).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| Error::Consistency(format!("steady-state solve failed: {e}")))
    }

    /// Null-space threshold for the eigenvalues of `M`.
    pub fn null_threshold(&self) -> f64 {
        let radius = self.m_eigen().values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        NULL_TOLERANCE * radius.max(1.0)
    }

    /// The two null vectors `|0>|I>` and `|1>|rho_ss>/‖rho_ss‖`.
    pub fn null_vectors(&self) -> Result<(CVec, CVec)> {
        let half = 1usize << (2 * self.n_sys());
        let mut eta0 = CVec::zeros(2 * half);
        eta0.rows_mut(0, half).copy_from(&normalized_identity_vector(self.n_sys()));
        let rho = vectorize(&self.ness()?.rho_ss).amplitudes().clone();
        let mut eta1 = CVec::zeros(2 * half);
        eta1.rows_mut(half, half).copy_from(&(&rho / c(rho.norm(), 0.0)));
        Ok((eta0, eta1))
    }
}

/// `t0 = 1 / (2 B)` with `B` the Pauli 1-norm of `M`.
pub fn choose_t0(m: &PauliSum) -> Result<f64> {
    let b = m.one_norm();
    if b <= 0.0 {
        return Err(Error::DegenerateModel("M vanishes; no phase scale".into()));
    }
    Ok(1.0 / (2.0 * b))
}

/// Circuit mapping `|0...0>` on `2N+1` qubits to `(|0>|I> + |1>|0...0>)/√2`.
pub fn prepare_xi_circuit(n_sys: usize) -> Result<Circuit> {
    if n_sys == 0 {
        return Err(Error::Config("need at least one system qubit".into()));
    }
    let mut circ = Circuit::new(2 * n_sys + 1);
    circ.push(Gate::single(GateKind::H, 0))?;
    for i in 1..=n_sys {
        circ.push(Gate::controlled(GateKind::H, 0, i))?;
        circ.push(Gate::cnot(i, i + n_sys))?;
    }
    circ.push(Gate::single(GateKind::X, 0))?;
    Ok(circ)
}

/// `(|0>|I> + |1>|0...0>)/√2` as a vector.
pub fn xi_vector(n_sys: usize) -> CVec {
    let half = 1usize << (2 * n_sys);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = CVec::zeros(2 * half);
    v.rows_mut(0, half).copy_from(&(normalized_identity_vector(n_sys) * c(s, 0.0)));
    v[half] = c(s, 0.0);
    v
}

/// Controlled `U^{2^j}` blocks for `j = 0..t`, acting on the `2N+1` register.
#[derive(Debug, Clone)]
pub struct PowerLadder {
    powers: Vec<CMat>,
}

impl PowerLadder {
    pub fn build(problem: &NessProblem, config: &QpeConfig) -> Result<Self> {
        config.validate()?;
        match config.oracle {
            OracleMode::Exact => Ok(Self::exact(problem, config.t, config.t0)),
            OracleMode::Trotter { order, steps } => {
                let base = trotter_power(problem.m_pauli()?, config.t0, order, steps)?;
                Ok(Self::by_squaring(base, config.t))
            }
        }
    }

    /// `e^{2πi 2^j M t0}` from one eigendecomposition.
    pub fn exact(problem: &NessProblem, t: usize, t0: f64) -> Self {
        let eig = problem.m_eigen();
        let powers = (0..t)
            .map(|j| {
                let scale = 2.0 * PI * t0 * (1u64 << j) as f64;
                eig.map(|phi| num_complex::Complex64::from_polar(1.0, scale * phi))
            })
            .collect();
        PowerLadder { powers }
    }

    /// `base^{2^j}` by repeated squaring, i.e. `base` applied `2^j` times.
    /// Each power is projected back onto the unitaries to stop rounding
    /// drift from compounding.
    pub fn by_squaring(base: CMat, t: usize) -> Self {
        let mut powers = Vec::with_capacity(t);
        let mut cur = nearest_unitary(base);
        for _ in 0..t {
            let next = nearest_unitary(&cur * &cur);
            powers.push(cur);
            cur = next;
        }
        PowerLadder { powers }
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn power(&self, j: usize) -> &CMat {
        &self.powers[j]
    }

    /// Applies controlled `U^{2^j}`.
    pub fn apply(&self, state: &mut StateVector, j: usize, control: usize, targets: &[usize]) -> Result<()> {
        let u = self.powers.get(j).ok_or_else(|| {
            Error::Dimension(format!("power index {j} outside ladder of length {}", self.len()))
        })?;
        state.apply_controlled_dense(control, u, targets)
    }
}

/// Unitary factor of the polar decomposition.
fn nearest_unitary(m: CMat) -> CMat {
    let svd = m.svd(true, true);
    svd.u.expect("requested") * svd.v_t.expect("requested")
}

/// Target block of `r` controlled Trotter steps of size `1/r`, i.e. the
/// product-formula approximation of `e^{2πi M t0}`.
pub fn trotter_power(m: &PauliSum, t0: f64, order: TrotterOrder, steps: usize) -> Result<CMat> {
    if steps == 0 {
        return Err(Error::Config("Trotter step count must be at least 1".into()));
    }
    let step = trotter_step(m, t0, 1.0 / steps as f64, order, false)?;
    let block = controlled_block(&step)?;
    let mut acc = block.clone();
    for _ in 1..steps {
        acc = &block * &acc;
    }
    Ok(acc)
}

#[derive(Debug, Clone)]
pub struct QpeOutcome {
    /// Probability of reading `0...0` on the phase register.
    pub p0: f64,
    /// Postselected `2N+1`-qubit register.
    pub psi3: StateVector,
    pub attempts: usize,
    pub rho_estimate: DenseOperator,
}

/// Runs preparation, the controlled-power ladder, inverse QFT and
/// postselection of the phase register on zero.
pub fn run(problem: &NessProblem, config: &QpeConfig) -> Result<QpeOutcome> {
    let ladder = PowerLadder::build(problem, config)?;
    run_with_ladder(problem, config, &ladder)
}

pub fn run_with_ladder(problem: &NessProblem, config: &QpeConfig, ladder: &PowerLadder) -> Result<QpeOutcome> {
    config.validate()?;
    let t = config.t;
    if ladder.len() < t {
        return Err(Error::Dimension(format!("ladder has {} powers, need {t}", ladder.len())));
    }
    let n_sys = problem.n_sys();
    let w = 2 * n_sys + 1;
    let phase: Vec<usize> = (0..t).collect();
    let register: Vec<usize> = (t..t + w).collect();

    let mut state = StateVector::zero(t + w);
    state.apply_circuit(&prepare_xi_circuit(n_sys)?.embed(t + w, t)?)?;
    for q in 0..t {
        state.apply_gate(&Gate::single(GateKind::H, q))?;
    }
    for j in 0..t {
        ladder.apply(&mut state, j, t - 1 - j, &register)?;
    }
    state.apply_circuit(&inverse_qft(t, &phase)?.embed(t + w, 0)?)?;

    let probs = state.marginal_probabilities(&phase)?;
    let p0 = probs[0];
    let attempts = match config.postselect {
        PostselectMode::ExactProjection => 1,
        PostselectMode::Sampled { seed, max_attempts } => {
            let mut rng = seeded_rng(seed);
            (1..=max_attempts)
                .find(|_| crate::sim::sample_index(&probs, &mut rng) == 0)
                .ok_or(Error::PostselectionFailure { attempts: max_attempts })?
        }
    };
    let (_, collapsed) = state.project_register(&phase, 0)?;
    let psi3 = collapsed.residual_register(&phase, 0)?;
    let rho_estimate = extract_density(&psi3, n_sys)?;
    Ok(QpeOutcome { p0, psi3, attempts, rho_estimate })
}

/// Density matrix encoded in the `|1>` branch of the dilation qubit.
pub fn extract_density(psi3: &StateVector, n_sys: usize) -> Result<DenseOperator> {
    let half = 1usize << (2 * n_sys);
    if psi3.dim() != 2 * half {
        return Err(Error::Dimension(format!(
            "expected a {}-qubit register, got {}",
            2 * n_sys + 1,
            psi3.n_qubits()
        )));
    }
    let branch = CVec::from_column_slice(&psi3.amplitudes()[half..]);
    if branch.norm() < 1e-300 {
        return Err(Error::DegenerateOutput("the |1> branch of the output is empty".into()));
    }
    let v = VectorizedDensity::from_amplitudes(n_sys, branch, NormConvention::UnitVector)?;
    let rho = v.to_trace_one().map_err(|e| Error::DegenerateOutput(e.to_string()))?;
    clean_density(&rho.devectorize())
}

/// Amplitude of outcome 0 squared for eigenphase `phi`.
pub fn alpha0_squared(phi: f64, t: usize) -> f64 {
    let s = (PI * phi).sin();
    if s.abs() < f64::MIN_POSITIVE {
        return 1.0;
    }
    let scale = (1u64 << t) as f64;
    let num = (PI * scale * phi).sin();
    (num * num) / (scale * scale * s * s)
}

/// Smallest `t` for which the error-probability bound falls below `eps_p`.
pub fn t_lower_bound(g: f64, eps_p: f64) -> i64 {
    ((1.0 / (2f64.sqrt() * PI * g)).log2() + (1.0 / eps_p).log2()).ceil() as i64
}

/// `1 / (π² g² 2^{2t+1})`.
pub fn error_probability_bound(g: f64, t: usize) -> f64 {
    1.0 / (PI * PI * g * g * 2f64.powi(2 * t as i32 + 1))
}

/// Outcome-zero statistics predicted from the eigendecomposition of `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticP0 {
    pub p0: f64,
    /// Weight of `|ξ>` on the null space of `M`.
    pub null_weight: f64,
    /// Contribution of the nonzero eigenvalues.
    pub p_e: f64,
}

pub fn analytic_p0(problem: &NessProblem, t: usize, t0: f64) -> AnalyticP0 {
    let eig = problem.m_eigen();
    let xi = xi_vector(problem.n_sys());
    let overlaps = eig.vectors.adjoint() * &xi;
    let tol = problem.null_threshold();
    let (mut null_weight, mut p_e) = (0.0, 0.0);
    for (k, &phi) in eig.values.iter().enumerate() {
        let w = overlaps[k].norm_sqr();
        if phi.abs() <= tol {
            null_weight += w;
        } else {
            p_e += w * alpha0_squared(phi * t0, t);
        }
    }
    AnalyticP0 { p0: null_weight + p_e, null_weight, p_e }
}

/// `c_1 = <η_1|1,0...0>`, the steady-state weight of the prepared state.
pub fn c1_coefficient(problem: &NessProblem) -> Result<num_complex::Complex64> {
    let (_, eta1) = problem.null_vectors()?;
    let half = eta1.len() / 2;
    let c1 = eta1[half].conj();
    if c1.im.abs() > 1e-10 {
        return Err(Error::Consistency(format!("c_1 = {c1} is not real")));
    }
    Ok(c1)
}

/// Probability that the postselected state lies outside the null space.
pub fn simulated_error_probability(problem: &NessProblem, outcome: &QpeOutcome) -> Result<f64> {
    let (eta0, eta1) = problem.null_vectors()?;
    let psi = outcome.psi3.to_cvec();
    let inside = eta0.dotc(&psi).norm_sqr() + eta1.dotc(&psi).norm_sqr();
    Ok(outcome.p0 * (1.0 - inside).max(0.0))
}

/// Draws one outcome of the phase register, for callers sampling by hand.
pub fn sample_phase_register<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    crate::sim::sample_index(probs, rng)
}
