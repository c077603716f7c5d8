use std::fmt;

use crate::bits;
use crate::gate::Gate;

/// Hermitian Pauli string `±P_0 ⊗ ... ⊗ P_{n-1}` in x/z bit form, where the
/// bit pair `(1, 1)` denotes `Y`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    neg: bool,
}

/// One-qubit Pauli as `(x, z)` bits.
pub(crate) fn pauli_char(x: bool, z: bool) -> char {
    match (x, z) {
        (false, false) => 'I',
        (true, false) => 'X',
        (true, true) => 'Y',
        (false, true) => 'Z',
    }
}

/// Exponent `g` (mod 4) such that `P1 · P2 = i^g P3` summed over qubits, for
/// Hermitian Paulis in bit form.
#[inline]
fn product_phase(x1: &[u64], z1: &[u64], x2: &[u64], z2: &[u64]) -> u32 {
    let mut plus = 0u32;
    let mut minus = 0u32;
    for w in 0..x1.len() {
        let (a, b, c, d) = (x1[w], z1[w], x2[w], z2[w]);
        let xo1 = a & !b;
        let yo1 = a & b;
        let zo1 = !a & b;
        let xo2 = c & !d;
        let yo2 = c & d;
        let zo2 = !c & d;
        plus += ((xo1 & yo2) | (yo1 & zo2) | (zo1 & xo2)).count_ones();
        minus += ((xo1 & zo2) | (yo1 & xo2) | (zo1 & yo2)).count_ones();
    }
    (plus + 4 * x1.len() as u32 * 64 - minus) % 4
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = bits::words_for(n.max(1));
        PauliString {
            n,
            x: vec![0; w],
            z: vec![0; w],
            neg: false,
        }
    }

    pub fn single(n: usize, q: usize, x: bool, z: bool) -> Self {
        let mut p = Self::identity(n);
        p.set(q, x, z);
        p
    }

    pub fn x_on(n: usize, qubits: impl IntoIterator<Item = usize>) -> Self {
        let mut p = Self::identity(n);
        for q in qubits {
            bits::set(&mut p.x, q, true);
        }
        p
    }

    pub fn z_on(n: usize, qubits: impl IntoIterator<Item = usize>) -> Self {
        let mut p = Self::identity(n);
        for q in qubits {
            bits::set(&mut p.z, q, true);
        }
        p
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_negative(&self) -> bool {
        self.neg
    }

    pub fn set_negative(&mut self, neg: bool) {
        self.neg = neg;
    }

    #[inline]
    pub fn get(&self, q: usize) -> (bool, bool) {
        (bits::get(&self.x, q), bits::get(&self.z, q))
    }

    #[inline]
    pub fn set(&mut self, q: usize, x: bool, z: bool) {
        bits::set(&mut self.x, q, x);
        bits::set(&mut self.z, q, z);
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    pub fn is_identity(&self) -> bool {
        bits::is_zero(&self.x) && bits::is_zero(&self.z)
    }

    /// Qubits carrying a non-identity factor.
    pub fn support(&self) -> Vec<usize> {
        let either: Vec<u64> = self.x.iter().zip(&self.z).map(|(a, b)| a | b).collect();
        bits::ones(&either).collect()
    }

    /// Symplectic inner product parity: `true` iff the two strings anticommute.
    pub fn anticommutes(&self, other: &PauliString) -> bool {
        (bits::and_popcount(&self.x, &other.z) + bits::and_popcount(&self.z, &other.x)) % 2 == 1
    }

    pub fn commutes(&self, other: &PauliString) -> bool {
        !self.anticommutes(other)
    }

    /// `self ← self · other` for commuting strings (the product stays Hermitian).
    pub fn mul_assign(&mut self, other: &PauliString) {
        debug_assert!(self.commutes(other), "product of anticommuting Paulis is not Hermitian");
        let g = product_phase(&self.x, &self.z, &other.x, &other.z);
        debug_assert_eq!(g % 2, 0);
        self.neg ^= other.neg ^ (g == 2);
        bits::xor_into(&mut self.x, &other.x);
        bits::xor_into(&mut self.z, &other.z);
    }

    /// `G P G†`.
    pub fn conjugate(&mut self, gate: &Gate) {
        match *gate {
            Gate::H(q) => {
                let (x, z) = self.get(q);
                self.neg ^= x & z;
                self.set(q, z, x);
            }
            Gate::S(q) => {
                let (x, z) = self.get(q);
                self.neg ^= x & z;
                self.set(q, x, z ^ x);
            }
            Gate::Sdg(q) => {
                let (x, z) = self.get(q);
                self.neg ^= x & !z;
                self.set(q, x, z ^ x);
            }
            Gate::SqrtX(q) => {
                let (x, z) = self.get(q);
                self.neg ^= z & !x;
                self.set(q, x ^ z, z);
            }
            Gate::SqrtXdg(q) => {
                let (x, z) = self.get(q);
                self.neg ^= x & z;
                self.set(q, x ^ z, z);
            }
            Gate::X(q) => self.neg ^= bits::get(&self.z, q),
            Gate::Z(q) => self.neg ^= bits::get(&self.x, q),
            Gate::Y(q) => {
                let (x, z) = self.get(q);
                self.neg ^= x ^ z;
            }
            Gate::Cx(c, t) => {
                let (xc, zc) = self.get(c);
                let (xt, zt) = self.get(t);
                self.neg ^= xc & zt & !(xt ^ zc);
                self.set(t, xt ^ xc, zt);
                self.set(c, xc, zc ^ zt);
            }
            Gate::Cz(a, b) => {
                let (xa, za) = self.get(a);
                let (xb, zb) = self.get(b);
                self.neg ^= xa & xb & (za ^ zb);
                self.set(a, xa, za ^ xb);
                self.set(b, xb, zb ^ xa);
            }
            Gate::Cy(c, t) => {
                self.conjugate(&Gate::Sdg(t));
                self.conjugate(&Gate::Cx(c, t));
                self.conjugate(&Gate::S(t));
            }
        }
    }

    /// Parses `[+|-][i]` followed by one of `I _ X Y Z` per qubit.
    pub fn parse(s: &str) -> Result<Self, PauliParseError> {
        let s = s.trim();
        let (neg, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        // An imaginary prefix cannot occur on a Hermitian generator; it is dropped.
        let body = body.strip_prefix('i').unwrap_or(body);
        if body.is_empty() {
            return Err(PauliParseError::Empty);
        }
        let mut p = PauliString::identity(body.chars().count());
        p.neg = neg;
        for (q, ch) in body.chars().enumerate() {
            let (x, z) = match ch {
                'I' | '_' => (false, false),
                'X' => (true, false),
                'Y' => (true, true),
                'Z' => (false, true),
                other => return Err(PauliParseError::IllegalChar { ch: other, position: q }),
            };
            p.set(q, x, z);
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PauliParseError {
    #[error("empty Pauli string")]
    Empty,
    #[error("illegal character `{ch}` at position {position}")]
    IllegalChar { ch: char, position: usize },
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.neg { '-' } else { '+' })?;
        for q in 0..self.n {
            let (x, z) = self.get(q);
            write!(f, "{}", pauli_char(x, z))?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
