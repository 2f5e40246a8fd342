//! Weighted Pauli strings.
//!
//! Axes are stored one per qubit with qubit 0 first. Qubit 0 is the most
//! significant bit of the computational-basis index everywhere in this crate.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, I, ONE, ZERO};

/// Coefficients with modulus below this are dropped by canonicalization.
pub const DEDUP_TOLERANCE: f64 = 1e-12;

/// Default cap on the register width accepted by [`pauli_decompose`].
pub const DEFAULT_DECOMPOSE_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauliAxis {
    I,
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => PauliAxis::I,
            (true, false) => PauliAxis::X,
            (true, true) => PauliAxis::Y,
            (false, true) => PauliAxis::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            PauliAxis::I => 'I',
            PauliAxis::X => 'X',
            PauliAxis::Y => 'Y',
            PauliAxis::Z => 'Z',
        }
    }

    pub fn matrix(self) -> [[C64; 2]; 2] {
        match self {
            PauliAxis::I => [[ONE, ZERO], [ZERO, ONE]],
            PauliAxis::X => [[ZERO, ONE], [ONE, ZERO]],
            PauliAxis::Y => [[ZERO, -I], [I, ZERO]],
            PauliAxis::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }
}

/// A tensor product of single-qubit Pauli operators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(Vec<PauliAxis>);

impl PauliString {
    pub fn new(axes: Vec<PauliAxis>) -> Self {
        PauliString(axes)
    }

    pub fn identity(width: usize) -> Self {
        PauliString(vec![PauliAxis::I; width])
    }

    /// Identity everywhere except the listed `(qubit, axis)` pairs.
    pub fn sparse(width: usize, ops: &[(usize, PauliAxis)]) -> Result<Self> {
        let mut axes = vec![PauliAxis::I; width];
        for &(q, a) in ops {
            if q >= width {
                return Err(Error::QubitOutOfRange { index: q, width });
            }
            if axes[q] != PauliAxis::I {
                return Err(Error::Config(format!("qubit {q} listed twice in Pauli string")));
            }
            axes[q] = a;
        }
        Ok(PauliString(axes))
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn axes(&self) -> &[PauliAxis] {
        &self.0
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|a| **a != PauliAxis::I).count()
    }

    /// Qubits carrying a non-identity factor, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != PauliAxis::I)
            .map(|(q, _)| q)
            .collect()
    }

    /// Bit masks (x-part, z-part) in the computational-basis index.
    fn masks(&self) -> (usize, usize) {
        let n = self.width();
        let mut xm = 0usize;
        let mut zm = 0usize;
        for (q, a) in self.0.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match a {
                PauliAxis::I => {}
                PauliAxis::X => xm |= bit,
                PauliAxis::Y => {
                    xm |= bit;
                    zm |= bit
                }
                PauliAxis::Z => zm |= bit,
            }
        }
        (xm, zm)
    }

    fn y_count(&self) -> usize {
        self.0.iter().filter(|a| **a == PauliAxis::Y).count()
    }

    /// Dense matrix of the string.
    pub fn to_dense(&self) -> CMat {
        let dim = 1usize << self.width();
        let mut m = CMat::zeros(dim, dim);
        self.add_to_dense(&mut m, ONE);
        m
    }

    /// `m += coeff * P` without materializing `P`.
    pub(crate) fn add_to_dense(&self, m: &mut CMat, coeff: C64) {
        let (xm, zm) = self.masks();
        let iy = i_pow(self.y_count());
        let dim = m.nrows();
        for col in 0..dim {
            let row = col ^ xm;
            let sign = if (col & zm).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            m[(row, col)] += coeff * iy * sign;
        }
    }
}

fn i_pow(k: usize) -> C64 {
    match k % 4 {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.0 {
            write!(f, "{}", a.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| match ch.to_ascii_uppercase() {
                'I' => Ok(PauliAxis::I),
                'X' => Ok(PauliAxis::X),
                'Y' => Ok(PauliAxis::Y),
                'Z' => Ok(PauliAxis::Z),
                other => Err(Error::Config(format!("invalid Pauli axis '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliString)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coefficient: C64,
    pub axes: PauliString,
}

impl PauliTerm {
    pub fn new(coefficient: C64, axes: PauliString) -> Self {
        PauliTerm { coefficient, axes }
    }

    pub fn real(coefficient: f64, axes: PauliString) -> Self {
        PauliTerm::new(c(coefficient, 0.0), axes)
    }
}

/// Canonical weighted sum of Pauli strings over a fixed register width.
///
/// Terms keep the order in which their axes first appeared; duplicates are
/// merged into the first occurrence and near-zero terms are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    width: usize,
    terms: Vec<PauliTerm>,
}

impl PauliSum {
    pub fn zero(width: usize) -> Self {
        PauliSum { width, terms: Vec::new() }
    }

    pub fn from_terms<T: IntoIterator<Item = PauliTerm>>(width: usize, terms: T) -> Result<Self> {
        let mut sum = PauliSum::zero(width);
        for t in terms {
            sum.accumulate(t)?;
        }
        sum.canonicalize();
        Ok(sum)
    }

    /// Adds a term without dropping small coefficients; call
    /// [`canonicalize`](Self::canonicalize) when done.
    fn accumulate(&mut self, term: PauliTerm) -> Result<()> {
        if term.axes.width() != self.width {
            return Err(Error::Dimension(format!(
                "Pauli string {} has width {}, sum has width {}",
                term.axes,
                term.axes.width(),
                self.width
            )));
        }
        match self.terms.iter_mut().find(|t| t.axes == term.axes) {
            Some(existing) => existing.coefficient += term.coefficient,
            None => self.terms.push(term),
        }
        Ok(())
    }

    pub fn canonicalize(&mut self) {
        self.terms.retain(|t| t.coefficient.norm() >= DEDUP_TOLERANCE);
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, axes: &PauliString) -> C64 {
        self.terms
            .iter()
            .find(|t| &t.axes == axes)
            .map_or(ZERO, |t| t.coefficient)
    }

    /// Sum of coefficient moduli; an upper bound on the spectral radius.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.norm()).sum()
    }

    pub fn max_weight(&self) -> usize {
        self.terms.iter().map(|t| t.axes.weight()).max().unwrap_or(0)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.iter().all(|t| t.coefficient.im.abs() <= tol)
    }

    pub fn scaled(&self, factor: C64) -> PauliSum {
        let mut out = self.clone();
        out.terms.iter_mut().for_each(|t| t.coefficient *= factor);
        out.canonicalize();
        out
    }

    pub fn to_dense(&self) -> CMat {
        let dim = 1usize << self.width;
        let mut m = CMat::zeros(dim, dim);
        for t in &self.terms {
            t.axes.add_to_dense(&mut m, t.coefficient);
        }
        m
    }

    /// Terms sorted by axes, for order-independent comparison.
    pub fn sorted_terms(&self) -> Vec<PauliTerm> {
        let mut t = self.terms.clone();
        t.sort_by(|a, b| a.axes.cmp(&b.axes));
        t
    }

    /// Largest coefficient difference over the union of both supports.
    pub fn max_coefficient_diff(&self, other: &PauliSum) -> f64 {
        let mut worst = 0.0_f64;
        for t in &self.terms {
            worst = worst.max((t.coefficient - other.coefficient(&t.axes)).norm());
        }
        for t in &other.terms {
            worst = worst.max((t.coefficient - self.coefficient(&t.axes)).norm());
        }
        worst
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if t.coefficient.im == 0.0 {
                write!(f, "{}*{}", t.coefficient.re, t.axes)?;
            } else {
                write!(f, "({}{:+}i)*{}", t.coefficient.re, t.coefficient.im, t.axes)?;
            }
        }
        Ok(())
    }
}

/// Hilbert-Schmidt projection of a dense operator onto all Pauli strings.
///
/// Fails when the operator acts on more than `cap` qubits, since the cost is
/// `O(8^n)`.
pub fn pauli_decompose(op: &CMat, cap: usize) -> Result<PauliSum> {
    let dim = op.nrows();
    if dim != op.ncols() || dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Dimension(format!(
            "expected a 2^n x 2^n matrix, got {}x{}",
            op.nrows(),
            op.ncols()
        )));
    }
    let n = dim.trailing_zeros() as usize;
    if n > cap {
        return Err(Error::Resource(format!(
            "Pauli decomposition of {n} qubits exceeds cap {cap}"
        )));
    }
    let norm = 1.0 / dim as f64;
    let mut terms = Vec::new();
    for xm in 0..dim {
        for zm in 0..dim {
            // Tr(P op) = i^{#Y} sum_x (-1)^{|x & z|} op[x, x ^ xm]
            let mut acc = ZERO;
            for x in 0..dim {
                let v = op[(x, x ^ xm)];
                if (x & zm).count_ones() % 2 == 0 {
                    acc += v;
                } else {
                    acc -= v;
                }
            }
            let axes: Vec<PauliAxis> = (0..n)
                .map(|q| {
                    let bit = 1usize << (n - 1 - q);
                    PauliAxis::from_bits(xm & bit != 0, zm & bit != 0)
                })
                .collect();
            let axes = PauliString(axes);
            let coeff = acc * i_pow(axes.y_count()) * norm;
            if coeff.norm() >= DEDUP_TOLERANCE {
                terms.push(PauliTerm::new(coeff, axes));
            }
        }
    }
    PauliSum::from_terms(n, terms)
}
