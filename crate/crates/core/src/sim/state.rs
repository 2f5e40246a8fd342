use num_complex::Complex64 as C64;
use rand::Rng;

use super::gate::{Circuit, Gate, Mat2};
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, ONE, ZERO};

const DENSE_UNITARY_TOLERANCE: f64 = 1e-10;
const MIN_PROBABILITY: f64 = 1e-300;

/// Amplitudes over `n` qubits; qubit 0 is the most significant index bit.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0…0>`.
    pub fn zero(n: usize) -> Self {
        StateVector::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = ONE;
        StateVector { n, amps }
    }

    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1 << n {
            return Err(Error::Dimension(format!(
                "{n} qubits need {} amplitudes, got {}",
                1usize << n,
                amps.len()
            )));
        }
        Ok(StateVector { n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn to_cvec(&self) -> CVec {
        CVec::from_column_slice(&self.amps)
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n * n < MIN_PROBABILITY {
            return Err(Error::ZeroProbability);
        }
        let inv = 1.0 / n;
        self.amps.iter_mut().for_each(|z| *z *= inv);
        Ok(self)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    #[inline]
    fn bit(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            Err(Error::QubitOutOfRange { index: q, width: self.n })
        } else {
            Ok(())
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        for q in gate.qubits() {
            self.check_qubit(q)?;
        }
        let m = gate.kind.matrix();
        let cmask = gate.control.map_or(0, |q| self.bit(q));
        if gate.kind.is_diagonal() {
            self.diagonal_kernel(gate.target, cmask, m[0][0], m[1][1]);
        } else {
            self.pair_kernel(gate.target, cmask, &m);
        }
        Ok(())
    }

    fn pair_kernel(&mut self, target: usize, cmask: usize, m: &Mat2) {
        let tbit = self.bit(target);
        let dim = self.amps.len();
        let mut base = 0;
        while base < dim {
            for i in base..base + tbit {
                if i & cmask != cmask {
                    continue;
                }
                let j = i | tbit;
                let a = self.amps[i];
                let b = self.amps[j];
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[j] = m[1][0] * a + m[1][1] * b;
            }
            base += 2 * tbit;
        }
    }

    fn diagonal_kernel(&mut self, target: usize, cmask: usize, d0: C64, d1: C64) {
        let tbit = self.bit(target);
        for (i, z) in self.amps.iter_mut().enumerate() {
            if i & cmask == cmask {
                *z *= if i & tbit == 0 { d0 } else { d1 };
            }
        }
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.width() != self.n {
            return Err(Error::Dimension(format!(
                "circuit width {} does not match state width {}",
                circuit.width(),
                self.n
            )));
        }
        circuit.gates().iter().try_for_each(|g| self.apply_gate(g))
    }

    /// Functional form of [`apply_circuit`](Self::apply_circuit).
    pub fn apply(&self, circuit: &Circuit) -> Result<StateVector> {
        let mut out = self.clone();
        out.apply_circuit(circuit)?;
        Ok(out)
    }

    /// Index offsets of the `2^k` target configurations, `targets[0]` as the
    /// most significant bit of the operator index.
    fn target_offsets(&self, targets: &[usize]) -> Result<(Vec<usize>, usize)> {
        let mut seen = 0usize;
        for &q in targets {
            self.check_qubit(q)?;
            if seen & self.bit(q) != 0 {
                return Err(Error::InvalidGate(format!("target qubit {q} repeated")));
            }
            seen |= self.bit(q);
        }
        let k = targets.len();
        let offsets = (0..1usize << k)
            .map(|s| {
                targets.iter().enumerate().fold(0, |acc, (p, &q)| {
                    if s & (1 << (k - 1 - p)) != 0 {
                        acc | self.bit(q)
                    } else {
                        acc
                    }
                })
            })
            .collect();
        Ok((offsets, seen))
    }

    fn dense_kernel(&mut self, u: &CMat, targets: &[usize], cmask: usize) -> Result<()> {
        let (offsets, tmask) = self.target_offsets(targets)?;
        if u.nrows() != offsets.len() || u.ncols() != offsets.len() {
            return Err(Error::Dimension(format!(
                "operator of size {} on {} targets",
                u.nrows(),
                targets.len()
            )));
        }
        if cmask & tmask != 0 {
            return Err(Error::InvalidGate("control overlaps targets".into()));
        }
        let size = offsets.len();
        let mut buf = vec![ZERO; size];
        for base in 0..self.amps.len() {
            if base & tmask != 0 || base & cmask != cmask {
                continue;
            }
            for (s, off) in offsets.iter().enumerate() {
                buf[s] = self.amps[base | off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (s, b) in buf.iter().enumerate() {
                    acc += u[(r, s)] * b;
                }
                self.amps[base | off] = acc;
            }
        }
        Ok(())
    }

    /// Applies a dense operator to `targets` without checking unitarity.
    pub fn apply_dense(&mut self, u: &CMat, targets: &[usize]) -> Result<()> {
        self.dense_kernel(u, targets, 0)
    }

    /// Applies unitary `u` to `targets` on the branch where `control` is 1.
    pub fn apply_controlled_dense(
        &mut self,
        control: usize,
        u: &CMat,
        targets: &[usize],
    ) -> Result<()> {
        self.check_qubit(control)?;
        let deviation = crate::linalg::unitary_deviation(u);
        if deviation > DENSE_UNITARY_TOLERANCE {
            return Err(Error::NotUnitary { deviation });
        }
        let cmask = self.bit(control);
        self.dense_kernel(u, targets, cmask)
    }

    /// Probability of every outcome on `qubits`, `qubits[0]` as the most
    /// significant outcome bit.
    pub fn marginal_probabilities(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        for &q in qubits {
            self.check_qubit(q)?;
        }
        let k = qubits.len();
        let mut probs = vec![0.0; 1 << k];
        for (i, z) in self.amps.iter().enumerate() {
            probs[self.outcome_of(i, qubits)] += z.norm_sqr();
        }
        Ok(probs)
    }

    fn outcome_of(&self, index: usize, qubits: &[usize]) -> usize {
        qubits
            .iter()
            .fold(0, |acc, &q| (acc << 1) | usize::from(index & self.bit(q) != 0))
    }

    /// Projects `qubits` onto `outcome` (bit `k - 1 - p` of `outcome` is
    /// qubit `qubits[p]`). Returns the probability and the renormalized state.
    pub fn project_register(&self, qubits: &[usize], outcome: usize) -> Result<(f64, StateVector)> {
        for &q in qubits {
            self.check_qubit(q)?;
        }
        if qubits.len() < usize::BITS as usize && outcome >= 1 << qubits.len() {
            return Err(Error::Dimension(format!(
                "outcome {outcome} does not fit in {} qubits",
                qubits.len()
            )));
        }
        let mut amps = self.amps.clone();
        let mut prob = 0.0;
        for (i, z) in amps.iter_mut().enumerate() {
            if self.outcome_of(i, qubits) == outcome {
                prob += z.norm_sqr();
            } else {
                *z = ZERO;
            }
        }
        if prob < MIN_PROBABILITY {
            return Err(Error::ZeroProbability);
        }
        let scale = 1.0 / prob.sqrt();
        amps.iter_mut().for_each(|z| *z *= scale);
        Ok((prob, StateVector { n: self.n, amps }))
    }

    /// Born-rule sample of `qubits`, returning the outcome and collapsed state.
    pub fn sample_measure<R: Rng + ?Sized>(
        &self,
        qubits: &[usize],
        rng: &mut R,
    ) -> Result<(usize, StateVector)> {
        let probs = self.marginal_probabilities(qubits)?;
        let outcome = sample_index(&probs, rng);
        let (_, collapsed) = self.project_register(qubits, outcome)?;
        Ok((outcome, collapsed))
    }

    /// State of the qubits other than `qubits`, read off the branch where
    /// `qubits` hold `outcome`. Exact when the state factorizes on that
    /// branch, e.g. right after [`project_register`](Self::project_register).
    pub fn residual_register(&self, qubits: &[usize], outcome: usize) -> Result<StateVector> {
        for &q in qubits {
            self.check_qubit(q)?;
        }
        let rest: Vec<usize> = (0..self.n).filter(|q| !qubits.contains(q)).collect();
        let mut amps = Vec::with_capacity(1 << rest.len());
        for (i, z) in self.amps.iter().enumerate() {
            if self.outcome_of(i, qubits) == outcome {
                amps.push(*z);
            }
        }
        StateVector::from_amplitudes(rest.len(), amps)?.normalized()
    }

    /// `<ψ|O|ψ>` for a dense operator on all qubits.
    pub fn expectation_dense(&self, op: &CMat) -> Result<C64> {
        if op.nrows() != self.dim() || op.ncols() != self.dim() {
            return Err(Error::Dimension(format!(
                "operator of size {} on a state of dimension {}",
                op.nrows(),
                self.dim()
            )));
        }
        let v = self.to_cvec();
        Ok(v.dotc(&(op * &v)))
    }

    /// Dense unitary of a circuit, built column by column.
    pub fn circuit_unitary(circuit: &Circuit) -> Result<CMat> {
        let n = circuit.width();
        let dim = 1 << n;
        let mut u = CMat::zeros(dim, dim);
        for col in 0..dim {
            let mut s = StateVector::basis(n, col);
            s.apply_circuit(circuit)?;
            for (row, z) in s.amps.iter().enumerate() {
                u[(row, col)] = *z;
            }
        }
        Ok(u)
    }
}

pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (k, &p) in probs.iter().enumerate() {
        if u < p {
            return k;
        }
        u -= p;
    }
    // rounding fell off the end: last outcome with nonzero weight
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}
