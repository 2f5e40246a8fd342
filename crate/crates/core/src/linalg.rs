//! Dense complex linear algebra helpers on top of `nalgebra`.
//!
//! Everything here works on `DMatrix<C64>`. The general (non-Hermitian)
//! eigensolver is a complex Schur factorization followed by triangular
//! back-substitution for the right eigenvectors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

/// Largest absolute entry.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn hermitian_deviation(m: &CMat) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn unitary_deviation(m: &CMat) -> f64 {
    let n = m.nrows();
    max_abs_diff(&(m.adjoint() * m), &identity(n))
}

/// Spectral (operator 2-) norm.
pub fn op_norm(m: &CMat) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s))
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| a.total_cmp(b));
    s
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: CMat,
}

impl HermitianEigen {
    pub fn new(m: &CMat) -> Self {
        let n = m.nrows();
        // symmetrize first; nalgebra reads only one triangle
        let sym = (m + m.adjoint()) * c(0.5, 0.0);
        let eig = sym.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        HermitianEigen { values, vectors }
    }

    /// `V f(D) V†` for a scalar function of the eigenvalues.
    pub fn map<F: Fn(f64) -> C64>(&self, f: F) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            let fv = f(v);
            for i in 0..n {
                scaled[(i, j)] *= fv;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Right eigenpairs of a general complex matrix.
pub struct GeneralEigen {
    pub values: Vec<C64>,
    /// Unit-norm right eigenvectors as columns, matching `values`.
    pub vectors: CMat,
}

impl GeneralEigen {
    pub fn new(m: &CMat) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() {
            return Err(Error::Dimension(format!(
                "eigendecomposition needs a square matrix, got {}x{}",
                n,
                m.ncols()
            )));
        }
        let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Consistency("Schur iteration did not converge".into()))?;
        let (q, t) = schur.unpack();
        let values: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
        let scale = max_abs(&t).max(f64::MIN_POSITIVE);
        let small = f64::EPSILON * scale;

        let mut vectors = CMat::zeros(n, n);
        let mut y = vec![ZERO; n];
        for k in 0..n {
            let lambda = values[k];
            y.iter_mut().for_each(|v| *v = ZERO);
            y[k] = ONE;
            for i in (0..k).rev() {
                let mut acc = ZERO;
                for l in (i + 1)..=k {
                    acc += t[(i, l)] * y[l];
                }
                let mut denom = t[(i, i)] - lambda;
                if denom.norm() < small {
                    denom = c(small, 0.0);
                }
                y[i] = -acc / denom;
            }
            let mut v = CVec::zeros(n);
            for i in 0..n {
                let mut acc = ZERO;
                for l in 0..=k {
                    acc += q[(i, l)] * y[l];
                }
                v[i] = acc;
            }
            let norm = v.norm();
            vectors.set_column(k, &(v / c(norm, 0.0)));
        }
        Ok(GeneralEigen { values, vectors })
    }
}

/// Hermitian square root with negative eigenvalues clipped to zero.
pub fn sqrt_psd(m: &CMat) -> CMat {
    HermitianEigen::new(m).map(|v| c(v.max(0.0).sqrt(), 0.0))
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

/// Matches two real multisets after sorting; returns the largest pairwise gap.
pub fn multiset_distance(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    Some(
        a.iter()
            .zip(&b)
            .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs())),
    )
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    #[test]
    fn general_eigen_reconstructs_random_matrix() {
        let mut r = rng(7);
        for n in [1, 2, 5, 16] {
            let m = random_matrix(&mut r, n);
            let eig = GeneralEigen::new(&m).unwrap();
            for k in 0..n {
                let v = eig.vectors.column(k).into_owned();
                let resid = (&m * &v - &v * eig.values[k]).norm();
                assert!(resid < 1e-10, "n={n} k={k} resid={resid}");
            }
        }
    }

    #[test]
    fn general_eigen_of_triangular_matrix_reads_diagonal() {
        let m = CMat::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(2.0, 0.0), ZERO, c(-0.5, 0.25)],
        );
        let eig = GeneralEigen::new(&m).unwrap();
        let mut vals = eig.values.clone();
        vals.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((vals[0] - c(-0.5, 0.25)).norm() < 1e-14);
        assert!((vals[1] - ONE).norm() < 1e-14);
    }

    #[test]
    fn hermitian_eigen_map_matches_square() {
        let mut r = rng(3);
        let h = random_hermitian(&mut r, 6);
        let eig = HermitianEigen::new(&h);
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        let sq = eig.map(|v| c(v * v, 0.0));
        assert!(max_abs_diff(&sq, &(&h * &h)) < 1e-12);
    }

    #[test]
    fn sqrt_psd_squares_back() {
        let mut r = rng(11);
        let rho = random_density(&mut r, 4);
        let s = sqrt_psd(&rho);
        assert!(max_abs_diff(&(&s * &s), &rho) < 1e-13);
    }
}
