//! The Clifford gate set shared by the simulator and the circuit compiler.
//!
//! `CY` follows the usual convention `|0⟩⟨0|⊗I + |1⟩⟨1|⊗Y`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    SqrtX(usize),
    SqrtXdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cz(usize, usize),
    Cx(usize, usize),
    Cy(usize, usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GateParseError {
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("gate `{name}` expects {expected} operand(s), got {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("bad qubit operand `{0}`")]
    BadOperand(String),
    #[error("two-qubit gate `{0}` has identical operands")]
    SameOperands(String),
}

impl Gate {
    pub fn from_name(name: &str, qubits: &[usize]) -> Result<Gate, GateParseError> {
        let upper = name.to_ascii_uppercase();
        let single: Option<fn(usize) -> Gate> = match upper.as_str() {
            "H" => Some(Gate::H),
            "S" => Some(Gate::S),
            "SDG" | "S_DAG" => Some(Gate::Sdg),
            "SX" | "SQRT_X" => Some(Gate::SqrtX),
            "SXDG" | "SQRT_X_DAG" => Some(Gate::SqrtXdg),
            "X" => Some(Gate::X),
            "Y" => Some(Gate::Y),
            "Z" => Some(Gate::Z),
            _ => None,
        };
        if let Some(ctor) = single {
            if qubits.len() != 1 {
                return Err(GateParseError::Arity {
                    name: name.to_string(),
                    expected: 1,
                    got: qubits.len(),
                });
            }
            return Ok(ctor(qubits[0]));
        }
        let double: fn(usize, usize) -> Gate = match upper.as_str() {
            "CZ" => Gate::Cz,
            "CX" | "CNOT" => Gate::Cx,
            "CY" => Gate::Cy,
            _ => return Err(GateParseError::UnknownGate(name.to_string())),
        };
        if qubits.len() != 2 {
            return Err(GateParseError::Arity {
                name: name.to_string(),
                expected: 2,
                got: qubits.len(),
            });
        }
        if qubits[0] == qubits[1] {
            return Err(GateParseError::SameOperands(name.to_string()));
        }
        Ok(double(qubits[0], qubits[1]))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::S(_) => "S",
            Gate::Sdg(_) => "SDG",
            Gate::SqrtX(_) => "SX",
            Gate::SqrtXdg(_) => "SXDG",
            Gate::X(_) => "X",
            Gate::Y(_) => "Y",
            Gate::Z(_) => "Z",
            Gate::Cz(..) => "CZ",
            Gate::Cx(..) => "CX",
            Gate::Cy(..) => "CY",
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cz(..) | Gate::Cx(..) | Gate::Cy(..))
    }

    /// Operands; the second is present for two-qubit gates.
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::H(q)
            | Gate::S(q)
            | Gate::Sdg(q)
            | Gate::SqrtX(q)
            | Gate::SqrtXdg(q)
            | Gate::X(q)
            | Gate::Y(q)
            | Gate::Z(q) => (q, None),
            Gate::Cz(a, b) | Gate::Cx(a, b) | Gate::Cy(a, b) => (a, Some(b)),
        }
    }

    pub fn support(&self) -> impl Iterator<Item = usize> {
        let (a, b) = self.qubits();
        std::iter::once(a).chain(b)
    }

    pub fn acts_on(&self, q: usize) -> bool {
        let (a, b) = self.qubits();
        a == q || b == Some(q)
    }

    pub fn overlaps(&self, other: &Gate) -> bool {
        other.support().any(|q| self.acts_on(q))
    }

    pub fn max_qubit(&self) -> usize {
        let (a, b) = self.qubits();
        b.map_or(a, |b| a.max(b))
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::S(q) => Gate::Sdg(q),
            Gate::Sdg(q) => Gate::S(q),
            Gate::SqrtX(q) => Gate::SqrtXdg(q),
            Gate::SqrtXdg(q) => Gate::SqrtX(q),
            g => g,
        }
    }

    /// Same gate with operands passed through `f`.
    pub fn remap(&self, f: impl Fn(usize) -> usize) -> Gate {
        match *self {
            Gate::H(q) => Gate::H(f(q)),
            Gate::S(q) => Gate::S(f(q)),
            Gate::Sdg(q) => Gate::Sdg(f(q)),
            Gate::SqrtX(q) => Gate::SqrtX(f(q)),
            Gate::SqrtXdg(q) => Gate::SqrtXdg(f(q)),
            Gate::X(q) => Gate::X(f(q)),
            Gate::Y(q) => Gate::Y(f(q)),
            Gate::Z(q) => Gate::Z(f(q)),
            Gate::Cz(a, b) => Gate::Cz(f(a), f(b)),
            Gate::Cx(a, b) => Gate::Cx(f(a), f(b)),
            Gate::Cy(a, b) => Gate::Cy(f(a), f(b)),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.qubits() {
            (a, None) => write!(f, "{} {}", self.name(), a),
            (a, Some(b)) => write!(f, "{} {},{}", self.name(), a, b),
        }
    }
}

impl FromStr for Gate {
    type Err = GateParseError;

    /// Parses `NAME q` or `NAME q,q` (whitespace around the comma is allowed).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (name, rest) = s.split_once(char::is_whitespace).unwrap_or((s, ""));
        let qubits = rest
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>().map_err(|_| GateParseError::BadOperand(t.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Gate::from_name(name, &qubits)
    }
}
