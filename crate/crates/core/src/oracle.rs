//! Exact classical reference: steady state by null-space solve, Liouvillian
//! spectrum and gap, singular values, fidelity and purity.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CVec, GeneralEigen, HermitianEigen};
use crate::lindblad::{normalized_identity_vector, vectorize, NormConvention, VectorizedDensity};
use crate::operator::DenseOperator;

/// Relative threshold: `|λ| < NULL_TOLERANCE * spectral_radius` counts as zero.
pub const NULL_TOLERANCE: f64 = 1e-10;
/// Eigenvalues below zero are clipped before taking square roots.
pub const PSD_CLIP: f64 = -1e-10;
pub const NESS_RESIDUAL_LIMIT: f64 = 1e-8;
pub const SPECTRAL_MATCH_TOLERANCE: f64 = 1e-9;
const TRACE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct NessSolution {
    pub rho_ss: DenseOperator,
    /// `‖L |rho_ss>‖` for the trace-one vectorization.
    pub residual: f64,
    pub purity: f64,
}

/// Steady state of a vectorized Liouvillian on `2N` qubits.
pub fn solve_ness(l: &DenseOperator) -> Result<NessSolution> {
    if !l.n_qubits().is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "Liouvillian must act on an even number of qubits, got {}",
            l.n_qubits()
        )));
    }
    let n_sys = l.n_qubits() / 2;
    let eig = GeneralEigen::new(l.matrix())?;
    let radius = eig.values.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    let null_tol = NULL_TOLERANCE * radius;
    let zeros = eig.values.iter().filter(|z| z.norm() <= null_tol).count();
    if zeros >= 2 {
        return Err(Error::NonUniqueNess { count: zeros });
    }
    let k = (0..eig.values.len())
        .min_by(|&a, &b| eig.values[a].norm().total_cmp(&eig.values[b].norm()))
        .expect("non-empty spectrum");
    let v = eig.vectors.column(k).into_owned();
    let vec = VectorizedDensity::from_amplitudes(n_sys, v, NormConvention::UnitVector)?;
    let rho = clean_density(&vec.to_trace_one()?.devectorize())?;
    let residual = (l.matrix() * vectorize(&rho).amplitudes()).norm();
    if residual > NESS_RESIDUAL_LIMIT {
        return Err(Error::Convergence { residual });
    }
    let purity = purity(&rho);
    Ok(NessSolution { rho_ss: rho, residual, purity })
}

/// Hermitizes, clips negative eigenvalues and renormalizes the trace.
pub fn clean_density(rho: &DenseOperator) -> Result<DenseOperator> {
    let herm = (rho + &rho.adjoint()).scale(c(0.5, 0.0));
    let eig = HermitianEigen::new(herm.matrix());
    let clipped = eig.map(|v| c(if v < PSD_CLIP { 0.0 } else { v.max(0.0) }, 0.0));
    let tr = linalg::trace(&clipped).re;
    if tr.abs() < f64::MIN_POSITIVE.sqrt() {
        return Err(Error::InvalidDensity("zero trace after clipping".into()));
    }
    DenseOperator::new(clipped / c(tr, 0.0))
}

pub fn purity(rho: &DenseOperator) -> f64 {
    // Tr(rho^2) = Σ |rho_jk|^2 for Hermitian rho
    rho.matrix().iter().map(|z| z.norm_sqr()).sum()
}

/// `Re Tr(O rho)`.
pub fn expectation(rho: &DenseOperator, obs: &DenseOperator) -> f64 {
    (obs * rho).trace().re
}

/// Spectral data of a Liouvillian and its Hermitian dilation.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub liouvillian_eigs: Vec<C64>,
    pub gap: f64,
    pub singular_values: Vec<f64>,
    pub m_eigs: Vec<f64>,
    /// Largest mismatch between `|eig(M)|` and the doubled singular values.
    pub pairing_error: f64,
    /// `‖L† |I>‖`: the identity is a left null vector for trace-preserving `L`.
    pub left_null_residual: f64,
}

impl SpectralReport {
    /// Smallest singular value above the null tolerance.
    pub fn min_nonzero_singular(&self) -> Option<f64> {
        let top = self.singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
        self.singular_values
            .iter()
            .copied()
            .filter(|&s| s > NULL_TOLERANCE * top)
            .min_by(|a, b| a.total_cmp(b))
    }

    /// The gap never exceeds the smallest nonzero singular value.
    pub fn weyl_bound_holds(&self) -> bool {
        match self.min_nonzero_singular() {
            Some(s) => self.gap <= s + SPECTRAL_MATCH_TOLERANCE,
            None => true,
        }
    }

    pub fn zero_eigenvalue_count(&self) -> usize {
        let radius = self.liouvillian_eigs.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
        self.liouvillian_eigs
            .iter()
            .filter(|z| z.norm() <= NULL_TOLERANCE * radius)
            .count()
    }
}

/// Liouvillian gap: smallest `|Re λ|` over eigenvalues above the null tolerance.
pub fn liouvillian_gap(eigs: &[C64]) -> f64 {
    let radius = eigs.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    let null_tol = NULL_TOLERANCE * radius;
    let gap = eigs
        .iter()
        .filter(|z| z.norm() > null_tol)
        .map(|z| z.re.abs())
        .min_by(|a, b| a.total_cmp(b))
        .unwrap_or(0.0);
    if gap <= null_tol {
        0.0
    } else {
        gap
    }
}

pub fn spectral_report(l: &DenseOperator, m: &DenseOperator) -> Result<SpectralReport> {
    if m.n_qubits() != l.n_qubits() + 1 {
        return Err(Error::Dimension(format!(
            "dilation must have one more qubit than the Liouvillian ({} vs {})",
            m.n_qubits(),
            l.n_qubits()
        )));
    }
    let eig = GeneralEigen::new(l.matrix())?;
    let gap = liouvillian_gap(&eig.values);
    let singular_values = linalg::singular_values(l.matrix());
    let m_eigs = HermitianEigen::new(m.matrix()).values;

    let abs_m: Vec<f64> = m_eigs.iter().map(|v| v.abs()).collect();
    let doubled: Vec<f64> = singular_values.iter().flat_map(|&s| [s, s]).collect();
    let pairing_error = linalg::multiset_distance(&abs_m, &doubled)
        .ok_or_else(|| Error::Consistency("spectrum sizes differ".into()))?;
    if pairing_error > SPECTRAL_MATCH_TOLERANCE {
        return Err(Error::Consistency(format!(
            "eigenvalues of M do not match ± singular values of L (error {pairing_error:e})"
        )));
    }
    let id = normalized_identity_vector(l.n_qubits() / 2);
    let left_null_residual = (l.matrix().adjoint() * id).norm();

    let mut liouvillian_eigs = eig.values;
    liouvillian_eigs.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    Ok(SpectralReport {
        liouvillian_eigs,
        gap,
        singular_values,
        m_eigs,
        pairing_error,
        left_null_residual,
    })
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(a) b sqrt(a)))^2`.
pub fn fidelity(a: &DenseOperator, b: &DenseOperator) -> Result<f64> {
    a.ensure_same_shape(b)?;
    for (name, rho) in [("first", a), ("second", b)] {
        let tr = rho.trace();
        if (tr - c(1.0, 0.0)).norm() > TRACE_TOLERANCE {
            return Err(Error::InvalidDensity(format!(
                "{name} argument has trace {tr}"
            )));
        }
    }
    let herm = |r: &DenseOperator| (r.matrix() + r.matrix().adjoint()) * c(0.5, 0.0);
    let sa = linalg::sqrt_psd(&herm(a));
    let inner = &sa * herm(b) * &sa;
    let root_sum: f64 = HermitianEigen::new(&inner)
        .values
        .iter()
        .map(|&v| v.max(0.0).sqrt())
        .sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}

/// Orthonormal basis (columns) of the eigenspace of a Hermitian operator
/// with eigenvalues of modulus at most `tol`.
pub fn hermitian_null_space(m: &DenseOperator, tol: f64) -> linalg::CMat {
    let eig = HermitianEigen::new(m.matrix());
    let cols: Vec<CVec> = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() <= tol)
        .map(|(k, _)| eig.vectors.column(k).into_owned())
        .collect();
    if cols.is_empty() {
        linalg::CMat::zeros(m.dim(), 0)
    } else {
        linalg::CMat::from_columns(&cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::testutil::*;
    use crate::lindblad::{build_liouvillian, build_m, single_spin_model, split_hermitian};
    use crate::pauli::PauliString;

    fn pauli(s: &str) -> DenseOperator {
        DenseOperator::new(s.parse::<PauliString>().unwrap().to_dense()).unwrap()
    }

    fn pure(amps: &[C64]) -> DenseOperator {
        let v = CVec::from_column_slice(amps);
        DenseOperator::new(&v * v.adjoint()).unwrap()
    }

    #[test]
    fn pure_decay_relaxes_to_lower_state() {
        let sol = solve_ness(&build_liouvillian(&single_spin_model(0.0))).unwrap();
        assert!((expectation(&sol.rho_ss, &pauli("Z")) + 1.0).abs() < 1e-12);
        assert!(expectation(&sol.rho_ss, &pauli("Y")).abs() < 1e-12);
        assert!((sol.purity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn driven_spin_matches_closed_form() {
        // Bloch equations for H = hX, A = σ⁻ give
        // <Z> = -1/(1 + 8h^2), <Y> = 4h/(1 + 8h^2), <X> = 0
        for h in [0.5, 1.0, 2.0] {
            let sol = solve_ness(&build_liouvillian(&single_spin_model(h))).unwrap();
            let den = 1.0 + 8.0 * h * h;
            assert!((expectation(&sol.rho_ss, &pauli("Z")) + 1.0 / den).abs() < 1e-12);
            assert!((expectation(&sol.rho_ss, &pauli("Y")) - 4.0 * h / den).abs() < 1e-12);
            assert!(expectation(&sol.rho_ss, &pauli("X")).abs() < 1e-12);
            assert!(sol.residual < 1e-10);
            assert!((sol.rho_ss.trace() - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn unitary_dynamics_has_no_unique_ness() {
        let model = crate::lindblad::LindbladModel::new(
            1,
            crate::operator::Operator::Dense(pauli("X")),
            vec![],
        )
        .unwrap();
        let err = solve_ness(&build_liouvillian(&model)).unwrap_err();
        assert!(matches!(err, Error::NonUniqueNess { count: 2 }));
    }

    #[test]
    fn single_spin_gap_is_half() {
        for h in [0.0, 0.5, 1.0, 2.0, 3.7] {
            let model = single_spin_model(h);
            let l = build_liouvillian(&model);
            let (lh, la) = split_hermitian(&model).unwrap();
            let m = build_m(&lh, &la).unwrap();
            let rep = spectral_report(&l, &m).unwrap();
            assert!((rep.gap - 0.5).abs() < 1e-10, "h={h} gap={}", rep.gap);
            assert!(rep.weyl_bound_holds());
            assert!(rep.pairing_error < 1e-9);
            assert!(rep.left_null_residual < 1e-12);
        }
    }

    #[test]
    fn unitary_singular_values_match_imaginary_parts() {
        let mut r = rng(12);
        let h = DenseOperator::new(random_hermitian(&mut r, 2)).unwrap();
        let model =
            crate::lindblad::LindbladModel::new(1, h.into(), vec![]).unwrap();
        let l = build_liouvillian(&model);
        let (lh, la) = split_hermitian(&model).unwrap();
        let rep = spectral_report(&l, &build_m(&lh, &la).unwrap()).unwrap();
        let im: Vec<f64> = rep.liouvillian_eigs.iter().map(|z| z.im.abs()).collect();
        assert!(linalg::multiset_distance(&im, &rep.singular_values).unwrap() < 1e-10);
        assert_eq!(rep.gap, 0.0);
    }

    #[test]
    fn fidelity_edge_cases() {
        let mut r = rng(77);
        let rho = DenseOperator::new(random_density(&mut r, 4)).unwrap();
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-10);
        let zero = pure(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let one = pure(&[c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(fidelity(&zero, &one).unwrap() < 1e-12);
        let bad = zero.scale(c(2.0, 0.0));
        assert!(matches!(fidelity(&bad, &one), Err(Error::InvalidDensity(_))));
    }

    #[test]
    fn fidelity_of_pure_states_is_overlap_squared() {
        let s = 1.0 / 2f64.sqrt();
        let plus = pure(&[c(s, 0.0), c(s, 0.0)]);
        let zero = pure(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!((fidelity(&plus, &zero).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn purity_of_maximally_mixed_state() {
        for n in 1..=3 {
            let rho = DenseOperator::identity(n).scale(c(1.0 / (1 << n) as f64, 0.0));
            assert!((1.0 / purity(&rho) - (1 << n) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn dilation_null_space_is_two_dimensional() {
        let model = single_spin_model(1.0);
        let (lh, la) = split_hermitian(&model).unwrap();
        let m = build_m(&lh, &la).unwrap();
        let basis = hermitian_null_space(&m, 1e-10);
        assert_eq!(basis.ncols(), 2);
    }
}
