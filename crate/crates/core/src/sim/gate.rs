use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{c, I, ONE, ZERO};

pub type Mat2 = [[C64; 2]; 2];

const UNITARITY_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    /// `diag(1, e^{iθ})`.
    Phase(f64),
    Unitary(Mat2),
}

impl GateKind {
    pub fn matrix(&self) -> Mat2 {
        match *self {
            GateKind::H => {
                let s = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                [[s, s], [s, -s]]
            }
            GateKind::X => [[ZERO, ONE], [ONE, ZERO]],
            GateKind::Y => [[ZERO, -I], [I, ZERO]],
            GateKind::Z => [[ONE, ZERO], [ZERO, -ONE]],
            GateKind::Rx(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
            }
            GateKind::Ry(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
            }
            GateKind::Rz(t) => [[C64::from_polar(1.0, -t / 2.0), ZERO], [ZERO, C64::from_polar(1.0, t / 2.0)]],
            GateKind::Phase(t) => [[ONE, ZERO], [ZERO, C64::from_polar(1.0, t)]],
            GateKind::Unitary(m) => m,
        }
    }

    pub fn inverse(&self) -> GateKind {
        match *self {
            GateKind::Rx(t) => GateKind::Rx(-t),
            GateKind::Ry(t) => GateKind::Ry(-t),
            GateKind::Rz(t) => GateKind::Rz(-t),
            GateKind::Phase(t) => GateKind::Phase(-t),
            GateKind::Unitary(m) => GateKind::Unitary([
                [m[0][0].conj(), m[1][0].conj()],
                [m[0][1].conj(), m[1][1].conj()],
            ]),
            other => other,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        match self {
            GateKind::Z | GateKind::Rz(_) | GateKind::Phase(_) => true,
            GateKind::Unitary(m) => m[0][1] == ZERO && m[1][0] == ZERO,
            _ => false,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::Rx(_) => "rx",
            GateKind::Ry(_) => "ry",
            GateKind::Rz(_) => "rz",
            GateKind::Phase(_) => "p",
            GateKind::Unitary(_) => "u",
        }
    }
}

fn unitarity_deviation(m: &Mat2) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..2 {
        for j in 0..2 {
            let acc: C64 = m.iter().map(|row| row[i].conj() * row[j]).sum();
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((acc - target).norm());
        }
    }
    worst
}

/// A single-target gate with at most one control qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub control: Option<usize>,
}

impl Gate {
    pub fn single(kind: GateKind, target: usize) -> Self {
        Gate { kind, target, control: None }
    }

    pub fn controlled(kind: GateKind, control: usize, target: usize) -> Self {
        Gate { kind, target, control: Some(control) }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::controlled(GateKind::X, control, target)
    }

    pub fn crz(control: usize, target: usize, angle: f64) -> Self {
        Gate::controlled(GateKind::Rz(angle), control, target)
    }

    pub fn inverse(&self) -> Gate {
        Gate { kind: self.kind.inverse(), ..*self }
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> {
        self.control.into_iter().chain(std::iter::once(self.target))
    }

    fn validate(&self, width: usize) -> Result<()> {
        for q in self.qubits() {
            if q >= width {
                return Err(Error::QubitOutOfRange { index: q, width });
            }
        }
        if self.control == Some(self.target) {
            return Err(Error::InvalidGate(format!(
                "control and target coincide on qubit {}",
                self.target
            )));
        }
        if let GateKind::Unitary(m) = &self.kind {
            let deviation = unitarity_deviation(m);
            if deviation > UNITARITY_TOLERANCE {
                return Err(Error::NotUnitary { deviation });
            }
        }
        Ok(())
    }

    fn shifted(&self, offset: usize) -> Gate {
        Gate {
            kind: self.kind,
            target: self.target + offset,
            control: self.control.map(|q| q + offset),
        }
    }
}

/// Text form: `<kind> <angle> <qubits...>`, kind prefixed with `c` when
/// controlled, angle `-` for fixed gates, control listed before target.
impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = if self.control.is_some() { "c" } else { "" };
        write!(f, "{prefix}{} ", self.kind.name())?;
        match self.kind {
            GateKind::Rx(t) | GateKind::Ry(t) | GateKind::Rz(t) | GateKind::Phase(t) => {
                write!(f, "{t:?}")?
            }
            GateKind::Unitary(m) => {
                let parts: Vec<String> = m
                    .iter()
                    .flatten()
                    .flat_map(|z| [format!("{:?}", z.re), format!("{:?}", z.im)])
                    .collect();
                write!(f, "{}", parts.join(","))?
            }
            _ => write!(f, "-")?,
        }
        for q in self.qubits() {
            write!(f, " {q}")?;
        }
        Ok(())
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidGate(format!("{msg}: '{line}'"));
        let mut parts = line.split_whitespace();
        let name = parts.next().ok_or_else(|| bad("empty gate line"))?;
        let angle = parts.next().ok_or_else(|| bad("missing angle field"))?;
        let qubits = parts
            .map(|p| p.parse::<usize>().map_err(|_| bad("bad qubit index")))
            .collect::<Result<Vec<_>>>()?;
        // "cx" is controlled-x; plain "x" is not, so only strip when 2 qubits
        let (controlled, base) = match qubits.len() {
            2 => (true, name.strip_prefix('c').ok_or_else(|| bad("two qubits need a controlled kind"))?),
            1 => (false, name),
            _ => return Err(bad("expected one or two qubits")),
        };
        let num = || angle.parse::<f64>().map_err(|_| bad("bad angle"));
        let kind = match base {
            "h" => GateKind::H,
            "x" => GateKind::X,
            "y" => GateKind::Y,
            "z" => GateKind::Z,
            "rx" => GateKind::Rx(num()?),
            "ry" => GateKind::Ry(num()?),
            "rz" => GateKind::Rz(num()?),
            "p" => GateKind::Phase(num()?),
            "u" => {
                let v = angle
                    .split(',')
                    .map(|s| s.parse::<f64>().map_err(|_| bad("bad matrix entry")))
                    .collect::<Result<Vec<_>>>()?;
                if v.len() != 8 {
                    return Err(bad("unitary needs 8 reals"));
                }
                GateKind::Unitary([[c(v[0], v[1]), c(v[2], v[3])], [c(v[4], v[5]), c(v[6], v[7])]])
            }
            _ => return Err(bad("unknown gate kind")),
        };
        Ok(if controlled {
            Gate::controlled(kind, qubits[0], qubits[1])
        } else {
            Gate::single(kind, qubits[0])
        })
    }
}

/// Ordered gate list over a fixed register width.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    width: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(width: usize) -> Self {
        Circuit { width, gates: Vec::new() }
    }

    pub fn from_gates(width: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut circ = Circuit::new(width);
        for g in gates {
            circ.push(g)?;
        }
        Ok(circ)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.width)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.width > self.width {
            return Err(Error::Dimension(format!(
                "cannot append a {}-qubit circuit to a {}-qubit one",
                other.width, self.width
            )));
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Gates reversed and individually inverted.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            width: self.width,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Same circuit placed on qubits `offset..offset + width` of a wider register.
    pub fn embed(&self, width: usize, offset: usize) -> Result<Circuit> {
        if offset + self.width > width {
            return Err(Error::Dimension(format!(
                "cannot embed {} qubits at offset {offset} into width {width}",
                self.width
            )));
        }
        Ok(Circuit {
            width,
            gates: self.gates.iter().map(|g| g.shifted(offset)).collect(),
        })
    }

    /// Line-oriented export: a `width` header then one gate per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("width {}\n", self.width);
        for g in &self.gates {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidGate("missing width header".into()))?;
        let width = header
            .strip_prefix("width ")
            .and_then(|w| w.trim().parse::<usize>().ok())
            .ok_or_else(|| Error::InvalidGate(format!("bad header '{header}'")))?;
        let gates = lines.map(str::parse).collect::<Result<Vec<Gate>>>()?;
        Circuit::from_gates(width, gates)
    }
}
