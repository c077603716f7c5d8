//! Preparation circuits: representation, text format, metrics, and the
//! compile passes (reconstruction, peephole, re-layering, CX-only form).

mod css;
mod peephole;
mod reconstruct;
mod relayer;

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::gate::{Gate, GateParseError};
use crate::tableau::{verify_circuit, PauliString, StabilizerTableau, TableauError, Verdict};

pub use css::css_cx_form;
pub use peephole::{merge_single_qubit_runs, peephole};
pub use reconstruct::{action_gates, reconstruct};
pub use relayer::relayer;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("line {line}: {source}")]
    Parse { line: usize, source: GateParseError },
    #[error("line {line}: bad header `{text}`")]
    Header { line: usize, text: String },
    #[error("gate {gate} addresses a qubit outside 0..{n}")]
    QubitOutOfRange { gate: Gate, n: usize },
    #[error("gates {first} and {second} overlap in layer {layer}")]
    LayerOverlap { layer: usize, first: usize, second: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error("action log leaves {0} edges")]
    NotTerminal(usize),
    #[error("no local Clifford frame completes the circuit")]
    FrameUnsolvable,
    #[error("gate {gate} at index {index} violates the CX-only precondition")]
    NotCssForm { index: usize, gate: Gate },
    #[error(transparent)]
    Tableau(#[from] TableauError),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
}

/// Gate list on `n` qubits with an optional layer index per gate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
    layers: Option<Vec<usize>>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Circuit { n, gates: Vec::new(), layers: None }
    }

    pub fn from_gates(n: usize, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        for g in &gates {
            if g.max_qubit() >= n {
                return Err(CircuitError::QubitOutOfRange { gate: *g, n });
            }
        }
        Ok(Circuit { n, gates, layers: None })
    }

    /// Builds a layered circuit; gates are listed layer by layer.
    pub fn from_layers(n: usize, layers: Vec<Vec<Gate>>) -> Result<Self, CircuitError> {
        let mut gates = Vec::new();
        let mut idx = Vec::new();
        for (l, layer) in layers.into_iter().enumerate() {
            for g in layer {
                gates.push(g);
                idx.push(l);
            }
        }
        let mut c = Circuit::from_gates(n, gates)?;
        c.set_layers(idx)?;
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn into_gates(self) -> Vec<Gate> {
        self.gates
    }

    pub fn layers(&self) -> Option<&[usize]> {
        self.layers.as_deref()
    }

    /// Attaches layer indices; they must be non-decreasing along the gate list
    /// with disjoint supports inside each layer.
    pub fn set_layers(&mut self, layers: Vec<usize>) -> Result<(), CircuitError> {
        assert_eq!(layers.len(), self.gates.len(), "one layer index per gate");
        let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
        for (i, (g, &l)) in self.gates.iter().zip(&layers).enumerate() {
            for q in g.support() {
                if let Some(&first) = owner.get(&(l, q)) {
                    return Err(CircuitError::LayerOverlap { layer: l, first, second: i });
                }
                owner.insert((l, q), i);
            }
        }
        self.layers = Some(layers);
        Ok(())
    }

    pub fn push(&mut self, g: Gate) {
        assert!(g.max_qubit() < self.n, "gate {g} out of range");
        self.gates.push(g);
        self.layers = None;
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn tq_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    /// Layer index per gate: the stored layers, or ASAP layering by qubit occupancy.
    pub fn layer_indices(&self) -> Vec<usize> {
        if let Some(l) = &self.layers {
            return l.clone();
        }
        let mut level = vec![0usize; self.n];
        self.gates
            .iter()
            .map(|g| {
                let l = g.support().map(|q| level[q]).max().unwrap_or(0);
                for q in g.support() {
                    level[q] = l + 1;
                }
                l
            })
            .collect()
    }

    /// Number of layers containing a two-qubit gate.
    pub fn tq_depth(&self) -> usize {
        let idx = self.layer_indices();
        let mut layers: Vec<usize> = self
            .gates
            .iter()
            .zip(&idx)
            .filter(|(g, _)| g.is_two_qubit())
            .map(|(_, &l)| l)
            .collect();
        layers.sort_unstable();
        layers.dedup();
        layers.len()
    }

    pub fn depth(&self) -> usize {
        self.layer_indices().iter().max().map_or(0, |m| m + 1)
    }

    pub fn simulate(&self) -> StabilizerTableau {
        StabilizerTableau::simulate(self.n, &self.gates).expect("gates checked at construction")
    }

    pub fn verify(&self, target: &StabilizerTableau) -> Result<Verdict, TableauError> {
        verify_circuit(self.n, &self.gates, target)
    }

    /// Text form: `# qubits n`, then one gate per line, with `# layer k`
    /// markers when layers are known.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# qubits {}", self.n).unwrap();
        let mut current = None;
        for (i, g) in self.gates.iter().enumerate() {
            if let Some(layers) = &self.layers {
                if current != Some(layers[i]) {
                    current = Some(layers[i]);
                    writeln!(s, "# layer {}", layers[i]).unwrap();
                }
            }
            writeln!(s, "{g}").unwrap();
        }
        s
    }

    /// Parses [`Circuit::to_text`] output. Without a `# qubits` header the
    /// width is one more than the largest operand.
    pub fn parse(text: &str) -> Result<Self, CircuitError> {
        let mut n = None;
        let mut gates = Vec::new();
        let mut layer_marks = Vec::new();
        let mut current_layer = None;
        let mut any_layer = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let mut words = comment.split_whitespace();
                match words.next() {
                    Some("qubits") => {
                        let v = words.next().and_then(|w| w.parse().ok()).ok_or(CircuitError::Header {
                            line: lineno + 1,
                            text: line.to_string(),
                        })?;
                        n = Some(v);
                    }
                    Some("layer") => {
                        let v = words.next().and_then(|w| w.parse().ok()).ok_or(CircuitError::Header {
                            line: lineno + 1,
                            text: line.to_string(),
                        })?;
                        current_layer = Some(v);
                        any_layer = true;
                    }
                    _ => {}
                }
                continue;
            }
            let g: Gate = line
                .parse()
                .map_err(|source| CircuitError::Parse { line: lineno + 1, source })?;
            gates.push(g);
            layer_marks.push(current_layer);
        }
        let n = n.unwrap_or_else(|| gates.iter().map(|g| g.max_qubit() + 1).max().unwrap_or(0));
        let mut c = Circuit::from_gates(n, gates)?;
        if any_layer && layer_marks.iter().all(|l| l.is_some()) {
            c.set_layers(layer_marks.into_iter().map(Option::unwrap).collect())?;
        }
        Ok(c)
    }
}

/// Images `U X_q U†, U Z_q U†` for `q = 0..n`, in that order, of the circuit unitary.
pub fn clifford_images(n: usize, gates: &[Gate]) -> Vec<PauliString> {
    let mut out = Vec::with_capacity(2 * n);
    for q in 0..n {
        for (x, z) in [(true, false), (false, true)] {
            let mut p = PauliString::single(n, q, x, z);
            for g in gates {
                p.conjugate(g);
            }
            out.push(p);
        }
    }
    out
}

/// Equal as unitaries up to global phase.
pub fn unitary_equivalent(a: &Circuit, b: &Circuit) -> bool {
    a.n == b.n && clifford_images(a.n, &a.gates) == clifford_images(b.n, &b.gates)
}

thread_local! {
    static COMMUTE_CACHE: RefCell<HashMap<(Gate, Gate), bool>> = RefCell::new(HashMap::new());
}

/// Exact commutation test on the joint support of two gates.
pub fn gates_commute(a: &Gate, b: &Gate) -> bool {
    if !a.overlaps(b) {
        return true;
    }
    let mut support: Vec<usize> = a.support().chain(b.support()).collect();
    support.sort_unstable();
    support.dedup();
    let local = |q: usize| support.iter().position(|&s| s == q).unwrap();
    let key = (a.remap(local), b.remap(local));
    if let Some(hit) = COMMUTE_CACHE.with(|c| c.borrow().get(&key).copied()) {
        return hit;
    }
    let k = support.len();
    let ab = clifford_images(k, &[key.0, key.1]);
    let ba = clifford_images(k, &[key.1, key.0]);
    let result = ab == ba;
    COMMUTE_CACHE.with(|c| c.borrow_mut().insert(key, result));
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let c = Circuit::from_layers(
            3,
            vec![vec![Gate::H(0), Gate::H(1), Gate::H(2)], vec![Gate::Cz(0, 1)], vec![Gate::Cx(1, 2)]],
        )
        .unwrap();
        let text = c.to_text();
        assert!(text.starts_with("# qubits 3\n# layer 0\nH 0\n"));
        assert_eq!(Circuit::parse(&text).unwrap(), c);
        let bare = Circuit::parse("CZ 0,4\nH 2\n").unwrap();
        assert_eq!(bare.n(), 5);
        assert!(matches!(Circuit::parse("CZ 0,0"), Err(CircuitError::Parse { line: 1, .. })));
    }

    #[test]
    fn depth_metrics() {
        let c = Circuit::from_gates(4, vec![Gate::H(0), Gate::Cz(0, 1), Gate::Cz(2, 3), Gate::Cz(1, 2)]).unwrap();
        assert_eq!(c.tq_count(), 3);
        // ASAP: CZ(2,3) in layer 0, CZ(0,1) after the H, CZ(1,2) last.
        assert_eq!(c.tq_depth(), 3);
        assert_eq!(c.depth(), 3);
        assert!(Circuit::from_layers(2, vec![vec![Gate::H(0), Gate::Cz(0, 1)]]).is_err());
    }

    #[test]
    fn commutation() {
        assert!(gates_commute(&Gate::Cz(0, 1), &Gate::Cz(1, 2)));
        assert!(gates_commute(&Gate::Cx(0, 1), &Gate::Cx(0, 2)));
        assert!(gates_commute(&Gate::Cx(0, 1), &Gate::Cx(2, 1)));
        assert!(!gates_commute(&Gate::Cx(0, 1), &Gate::Cx(1, 2)));
        assert!(!gates_commute(&Gate::Cz(0, 1), &Gate::Cx(2, 1)));
        assert!(gates_commute(&Gate::S(0), &Gate::Cx(0, 1)));
        assert!(!gates_commute(&Gate::H(0), &Gate::Cz(0, 1)));
        assert!(gates_commute(&Gate::Cy(0, 1), &Gate::Cy(0, 1)));
    }
}
