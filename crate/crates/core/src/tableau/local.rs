//! Single-qubit Clifford group elements and per-qubit frames of them.

use std::fmt;
use std::sync::OnceLock;

use crate::gate::Gate;

use super::pauli::{pauli_char, PauliString};

/// Signed one-qubit Pauli in bit form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Image {
    x: bool,
    z: bool,
    neg: bool,
}

impl Image {
    fn code(self) -> usize {
        (self.x as usize) | (self.z as usize) << 1 | (self.neg as usize) << 2
    }
}

/// Element of the 24-element single-qubit Clifford group (modulo global
/// phase), stored as the signed images of `X` and `Z` under conjugation.
/// The unsigned bits form the symplectic 2×2 matrix over GF(2).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SingleQubitClifford {
    x_image: Image,
    z_image: Image,
}

impl Default for SingleQubitClifford {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl SingleQubitClifford {
    pub const IDENTITY: SingleQubitClifford = SingleQubitClifford {
        x_image: Image { x: true, z: false, neg: false },
        z_image: Image { x: false, z: true, neg: false },
    };

    /// The element implemented by a single-qubit gate (its operand is ignored).
    ///
    /// # Panics
    /// On two-qubit gates.
    pub fn from_gate(gate: &Gate) -> Self {
        assert!(!gate.is_two_qubit(), "not a single-qubit gate: {gate}");
        let g = gate.remap(|_| 0);
        let image = |x, z| {
            let mut p = PauliString::single(1, 0, x, z);
            p.conjugate(&g);
            let (x, z) = p.get(0);
            Image { x, z, neg: p.is_negative() }
        };
        SingleQubitClifford {
            x_image: image(true, false),
            z_image: image(false, true),
        }
    }

    /// Builds the element with the given symplectic action `X ↦ (xx, xz)`,
    /// `Z ↦ (zx, zz)` and `+` signs. Returns `None` if the map is not invertible.
    pub fn from_symplectic(xx: bool, xz: bool, zx: bool, zz: bool) -> Option<Self> {
        if (xx & zz) ^ (xz & zx) {
            Some(SingleQubitClifford {
                x_image: Image { x: xx, z: xz, neg: false },
                z_image: Image { x: zx, z: zz, neg: false },
            })
        } else {
            None
        }
    }

    /// Builds the element from signed images `(x, z, negative)` of `X` and `Z`.
    /// Returns `None` if they do not define a Clifford.
    pub fn from_images(x_image: (bool, bool, bool), z_image: (bool, bool, bool)) -> Option<Self> {
        let (xx, xz, xn) = x_image;
        let (zx, zz, zn) = z_image;
        if !((xx & zz) ^ (xz & zx)) {
            return None;
        }
        Some(SingleQubitClifford {
            x_image: Image { x: xx, z: xz, neg: xn },
            z_image: Image { x: zx, z: zz, neg: zn },
        })
    }

    fn code(&self) -> usize {
        self.x_image.code() | self.z_image.code() << 3
    }

    /// Image of a signed one-qubit Pauli `(x, z, neg)` under conjugation.
    fn map(&self, p: Image) -> Image {
        match (p.x, p.z) {
            (false, false) => p,
            (true, false) => Image { neg: self.x_image.neg ^ p.neg, ..self.x_image },
            (false, true) => Image { neg: self.z_image.neg ^ p.neg, ..self.z_image },
            (true, true) => {
                // Y = i X Z  ⇒  C(Y) = i C(X) C(Z)
                let (a, b) = (self.x_image, self.z_image);
                let xo = a.x & !a.z;
                let yo = a.x & a.z;
                let zo = !a.x & a.z;
                let plus = (xo && b.x && b.z) || (yo && !b.x && b.z) || (zo && b.x && !b.z);
                // i · i^{±1}: +1 gives -1, -1 gives +1
                Image {
                    x: a.x ^ b.x,
                    z: a.z ^ b.z,
                    neg: a.neg ^ b.neg ^ plus ^ p.neg,
                }
            }
        }
    }

    /// Apply `self` first, then `next`.
    pub fn then(&self, next: &SingleQubitClifford) -> SingleQubitClifford {
        SingleQubitClifford {
            x_image: next.map(self.x_image),
            z_image: next.map(self.z_image),
        }
    }

    pub fn then_gate(&self, gate: &Gate) -> SingleQubitClifford {
        self.then(&SingleQubitClifford::from_gate(gate))
    }

    pub fn inverse(&self) -> SingleQubitClifford {
        *table()
            .elements
            .iter()
            .find(|c| self.then(c) == Self::IDENTITY)
            .expect("group element has an inverse")
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    /// True for the four Paulis `I, X, Y, Z`.
    pub fn is_pauli(&self) -> bool {
        self.x_image.x && !self.x_image.z && !self.z_image.x && self.z_image.z
    }

    /// A shortest gate word implementing this element on qubit `q`, in circuit order.
    pub fn gates(&self, q: usize) -> Vec<Gate> {
        table().words[self.code()]
            .as_ref()
            .expect("every valid element is in the table")
            .iter()
            .map(|g| g.remap(|_| q))
            .collect()
    }

    /// Conjugates qubit `q` of a Pauli string by this element.
    pub fn conjugate_qubit(&self, p: &mut PauliString, q: usize) {
        let (x, z) = p.get(q);
        let img = self.map(Image { x, z, neg: false });
        p.set(q, img.x, img.z);
        p.set_negative(p.is_negative() ^ img.neg);
    }

    /// All 24 group elements.
    pub fn all() -> &'static [SingleQubitClifford] {
        &table().elements
    }
}

impl fmt::Debug for SingleQubitClifford {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |i: Image| format!("{}{}", if i.neg { '-' } else { '+' }, pauli_char(i.x, i.z));
        write!(f, "C(X->{}, Z->{})", s(self.x_image), s(self.z_image))
    }
}

struct Table {
    elements: Vec<SingleQubitClifford>,
    words: Vec<Option<Vec<Gate>>>,
}

fn table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(|| {
        let generators = [
            Gate::H(0),
            Gate::S(0),
            Gate::Sdg(0),
            Gate::SqrtX(0),
            Gate::SqrtXdg(0),
            Gate::X(0),
            Gate::Y(0),
            Gate::Z(0),
        ];
        let mut words: Vec<Option<Vec<Gate>>> = vec![None; 64];
        let mut elements = vec![SingleQubitClifford::IDENTITY];
        words[SingleQubitClifford::IDENTITY.code()] = Some(Vec::new());
        let mut frontier = 0;
        while frontier < elements.len() {
            let current = elements[frontier];
            let word = words[current.code()].clone().unwrap();
            for g in &generators {
                let next = current.then_gate(g);
                if words[next.code()].is_none() {
                    let mut w = word.clone();
                    w.push(*g);
                    words[next.code()] = Some(w);
                    elements.push(next);
                }
            }
            frontier += 1;
        }
        debug_assert_eq!(elements.len(), 24);
        Table { elements, words }
    })
}

/// Per-qubit single-qubit Cliffords `C = ⊗ C_q`, so that a state is `C |G⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalCliffordFrame {
    ops: Vec<SingleQubitClifford>,
}

impl LocalCliffordFrame {
    pub fn identity(n: usize) -> Self {
        LocalCliffordFrame {
            ops: vec![SingleQubitClifford::IDENTITY; n],
        }
    }

    pub fn from_ops(ops: Vec<SingleQubitClifford>) -> Self {
        LocalCliffordFrame { ops }
    }

    pub fn n(&self) -> usize {
        self.ops.len()
    }

    pub fn get(&self, q: usize) -> SingleQubitClifford {
        self.ops[q]
    }

    pub fn set(&mut self, q: usize, c: SingleQubitClifford) {
        self.ops[q] = c;
    }

    pub fn ops(&self) -> &[SingleQubitClifford] {
        &self.ops
    }

    pub fn is_identity(&self) -> bool {
        self.ops.iter().all(|c| c.is_identity())
    }

    /// Frame obtained by applying `gate` after this one.
    ///
    /// # Panics
    /// On two-qubit gates.
    pub fn push_gate(&mut self, gate: &Gate) {
        let (q, _) = gate.qubits();
        self.ops[q] = self.ops[q].then_gate(gate);
    }

    /// Frame obtained by applying `gate` *before* this one.
    pub fn prepend_gate(&mut self, gate: &Gate) {
        let (q, _) = gate.qubits();
        self.ops[q] = SingleQubitClifford::from_gate(gate).then(&self.ops[q]);
    }

    /// `self` first, then `next`, qubit by qubit.
    pub fn then(&self, next: &LocalCliffordFrame) -> LocalCliffordFrame {
        LocalCliffordFrame {
            ops: self.ops.iter().zip(&next.ops).map(|(a, b)| a.then(b)).collect(),
        }
    }

    pub fn inverse(&self) -> LocalCliffordFrame {
        LocalCliffordFrame {
            ops: self.ops.iter().map(|c| c.inverse()).collect(),
        }
    }

    /// Shortest gate words for every qubit, in qubit order.
    pub fn gates(&self) -> Vec<Gate> {
        self.ops.iter().enumerate().flat_map(|(q, c)| c.gates(q)).collect()
    }

    /// Conjugates every qubit of `p` by its frame element.
    pub fn conjugate(&self, p: &mut PauliString) {
        for (q, c) in self.ops.iter().enumerate() {
            c.conjugate_qubit(p, q);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_has_24_elements_with_short_words() {
        let all = SingleQubitClifford::all();
        assert_eq!(all.len(), 24);
        for c in all {
            let word = c.gates(0);
            assert!(word.len() <= 2, "{c:?} needs {word:?}");
            let rebuilt = word
                .iter()
                .fold(SingleQubitClifford::IDENTITY, |acc, g| acc.then_gate(g));
            assert_eq!(rebuilt, *c);
        }
    }

    #[test]
    fn composition_matches_pauli_conjugation() {
        for a in SingleQubitClifford::all() {
            for b in SingleQubitClifford::all() {
                let ab = a.then(b);
                for (x, z) in [(true, false), (false, true), (true, true)] {
                    let mut p1 = PauliString::single(1, 0, x, z);
                    for g in a.gates(0).iter().chain(b.gates(0).iter()) {
                        p1.conjugate(g);
                    }
                    let mut p2 = PauliString::single(1, 0, x, z);
                    ab.conjugate_qubit(&mut p2, 0);
                    assert_eq!(p1, p2);
                }
            }
        }
    }

    #[test]
    fn inverse_and_paulis() {
        for c in SingleQubitClifford::all() {
            assert!(c.then(&c.inverse()).is_identity());
        }
        assert_eq!(SingleQubitClifford::all().iter().filter(|c| c.is_pauli()).count(), 4);
        let hs = SingleQubitClifford::from_gate(&Gate::H(0)).then_gate(&Gate::S(0));
        assert!(!hs.is_pauli());
        assert!(SingleQubitClifford::from_symplectic(true, true, true, true).is_none());
    }

    #[test]
    fn frame_prepend_and_push() {
        let mut f = LocalCliffordFrame::identity(2);
        f.push_gate(&Gate::S(1));
        f.prepend_gate(&Gate::H(1));
        let expected = SingleQubitClifford::from_gate(&Gate::H(0)).then_gate(&Gate::S(0));
        assert_eq!(f.get(1), expected);
        assert!(f.get(0).is_identity());
    }
}
