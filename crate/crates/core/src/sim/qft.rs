use std::f64::consts::PI;

use super::gate::{Circuit, Gate, GateKind};
use crate::error::Result;

fn swap(circ: &mut Circuit, a: usize, b: usize) -> Result<()> {
    circ.push(Gate::cnot(a, b))?;
    circ.push(Gate::cnot(b, a))?;
    circ.push(Gate::cnot(a, b))
}

/// Textbook QFT on `qubits` (first listed = most significant), including the
/// final bit-reversal swaps. Uses `O(t^2)` gates.
pub fn qft(width: usize, qubits: &[usize]) -> Result<Circuit> {
    let t = qubits.len();
    let mut circ = Circuit::new(width);
    for i in 0..t {
        circ.push(Gate::single(GateKind::H, qubits[i]))?;
        for j in (i + 1)..t {
            let angle = 2.0 * PI / (1u64 << (j - i + 1)) as f64;
            circ.push(Gate::controlled(GateKind::Phase(angle), qubits[j], qubits[i]))?;
        }
    }
    for i in 0..t / 2 {
        swap(&mut circ, qubits[i], qubits[t - 1 - i])?;
    }
    Ok(circ)
}

pub fn inverse_qft(width: usize, qubits: &[usize]) -> Result<Circuit> {
    Ok(qft(width, qubits)?.inverse())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, CMat};
    use crate::sim::StateVector;

    fn phase_ramp(t: usize, phi: f64) -> StateVector {
        let dim = 1usize << t;
        let norm = 1.0 / (dim as f64).sqrt();
        let amps = (0..dim)
            .map(|k| num_complex::Complex64::from_polar(norm, 2.0 * PI * phi * k as f64))
            .collect();
        StateVector::from_amplitudes(t, amps).unwrap()
    }

    #[test]
    fn single_qubit_inverse_is_hadamard() {
        let circ = inverse_qft(1, &[0]).unwrap();
        assert_eq!(circ.gates(), &[Gate::single(GateKind::H, 0)]);
    }

    #[test]
    fn qft_matches_dft_matrix() {
        let t = 3;
        let dim = 1 << t;
        let u = StateVector::circuit_unitary(&qft(t, &[0, 1, 2]).unwrap()).unwrap();
        let dft = CMat::from_fn(dim, dim, |y, x| {
            num_complex::Complex64::from_polar(
                1.0 / (dim as f64).sqrt(),
                2.0 * PI * (x * y) as f64 / dim as f64,
            )
        });
        assert!(max_abs_diff(&u, &dft) < 1e-12);
    }

    #[test]
    fn integer_phase_is_read_exactly() {
        let mut s = phase_ramp(3, 5.0 / 8.0);
        s.apply_circuit(&inverse_qft(3, &[0, 1, 2]).unwrap()).unwrap();
        assert!((s.amplitudes()[0b101].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fractional_phase_distribution() {
        // |α_k|^2 = sin^2(π 2^t δ) / (2^{2t} sin^2(π δ)), δ = φ - k/2^t
        let t = 4;
        let phi: f64 = 0.3;
        let mut s = phase_ramp(t, phi);
        s.apply_circuit(&inverse_qft(t, &[0, 1, 2, 3]).unwrap()).unwrap();
        let dim = (1 << t) as f64;
        for k in 0..(1 << t) {
            let d = phi - k as f64 / dim;
            let expected = (PI * dim * d).sin().powi(2) / (dim * dim * (PI * d).sin().powi(2));
            let got = s.amplitudes()[k].norm_sqr();
            assert!((got - expected).abs() < 1e-12, "k={k}: {got} vs {expected}");
        }
    }

    #[test]
    fn qft_then_inverse_is_identity() {
        let qs = [0, 1, 2, 3];
        let mut circ = qft(4, &qs).unwrap();
        circ.append(&inverse_qft(4, &qs).unwrap()).unwrap();
        let u = StateVector::circuit_unitary(&circ).unwrap();
        assert!(max_abs_diff(&u, &CMat::identity(16, 16)) < 1e-12);
    }

    #[test]
    fn gate_count_is_quadratic() {
        for t in 1..8usize {
            let circ = qft(t, &(0..t).collect::<Vec<_>>()).unwrap();
            assert_eq!(circ.len(), t * (t + 1) / 2 + 3 * (t / 2));
        }
    }
}
