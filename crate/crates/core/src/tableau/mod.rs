//! Stabilizer tableaux: parsing, Clifford simulation, graph-form conversion
//! and circuit verification.

mod lc_equiv;
mod local;
mod pauli;

use std::fmt;

use thiserror::Error;

use crate::bits;
use crate::gate::Gate;
use crate::graph::Graph;

pub use lc_equiv::{find_lc_equivalence, LC_SEARCH_CAP};
pub use local::{LocalCliffordFrame, SingleQubitClifford};
pub use pauli::{PauliParseError, PauliString};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TableauError {
    #[error("no stabilizer rows given")]
    Empty,
    #[error("row {row}: {source}")]
    Parse { row: usize, source: PauliParseError },
    #[error("row {row} has length {got}, expected {expected}")]
    Ragged { row: usize, expected: usize, got: usize },
    #[error("row {row} anticommutes with row {other}")]
    NonCommuting { row: usize, other: usize },
    #[error("row {row} is dependent on the preceding rows")]
    Dependent { row: usize },
    #[error("expected {expected} independent rows for {expected} qubits, got {got}")]
    Underdetermined { expected: usize, got: usize },
    #[error("gate {gate} addresses a qubit outside 0..{n}")]
    QubitOutOfRange { gate: Gate, n: usize },
}

/// Whether a Pauli string, up to sign, lies in a stabilizer group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Positive,
    Negative,
    Absent,
}

/// Full-rank stabilizer tableau of an `n`-qubit pure state.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StabilizerTableau {
    n: usize,
    rows: Vec<PauliString>,
}

/// `state = frame · |graph⟩`, i.e. prepare the graph state and then apply the
/// per-qubit frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphForm {
    pub graph: Graph,
    pub frame: LocalCliffordFrame,
}

/// Outcome of [`verify_circuit`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Exact,
    /// Equal after appending the given per-qubit dressing.
    UpToLocalClifford(LocalCliffordFrame),
    /// `row` is the first target generator not stabilizing the circuit output.
    Fail { row: usize, generator: String },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Exact => "exact",
            Verdict::UpToLocalClifford(_) => "up-to-local-clifford",
            Verdict::Fail { .. } => "fail",
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Verdict::Exact)
    }
}

impl StabilizerTableau {
    /// Validates rows: equal lengths, pairwise commuting, independent, and
    /// exactly as many rows as qubits.
    pub fn from_rows(rows: Vec<PauliString>) -> Result<Self, TableauError> {
        let Some(first) = rows.first() else {
            return Err(TableauError::Empty);
        };
        let n = first.n();
        for (i, r) in rows.iter().enumerate() {
            if r.n() != n {
                return Err(TableauError::Ragged { row: i, expected: n, got: r.n() });
            }
        }
        for i in 0..rows.len() {
            for j in 0..i {
                if rows[i].anticommutes(&rows[j]) {
                    return Err(TableauError::NonCommuting { row: i, other: j });
                }
            }
        }
        let mut basis = Basis::new(n);
        for (i, r) in rows.iter().enumerate() {
            if !basis.insert(r.clone()) {
                return Err(TableauError::Dependent { row: i });
            }
        }
        if rows.len() != n {
            return Err(TableauError::Underdetermined { expected: n, got: rows.len() });
        }
        Ok(StabilizerTableau { n, rows })
    }

    /// Parses one Pauli string per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, TableauError> {
        let mut rows = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = rows.len();
            rows.push(PauliString::parse(line).map_err(|source| TableauError::Parse { row, source })?);
        }
        Self::from_rows(rows)
    }

    pub fn parse_lines<S: AsRef<str>>(lines: &[S]) -> Result<Self, TableauError> {
        let rows = lines
            .iter()
            .enumerate()
            .map(|(row, l)| {
                PauliString::parse(l.as_ref()).map_err(|source| TableauError::Parse { row, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rows(rows)
    }

    /// `|0…0⟩`.
    pub fn zero_state(n: usize) -> Self {
        StabilizerTableau {
            n,
            rows: (0..n).map(|q| PauliString::single(n, q, false, true)).collect(),
        }
    }

    /// Canonical graph-state tableau with generators `X_i Z_{n(i)}`.
    pub fn graph_state(g: &Graph) -> Self {
        let n = g.n();
        let rows = (0..n)
            .map(|i| {
                let mut p = PauliString::single(n, i, true, false);
                for j in g.neighbors(i) {
                    p.set(j, false, true);
                }
                p
            })
            .collect();
        StabilizerTableau { n, rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[PauliString] {
        &self.rows
    }

    /// Conjugates every row by `gate`.
    pub fn apply(&mut self, gate: &Gate) -> Result<(), TableauError> {
        if gate.max_qubit() >= self.n {
            return Err(TableauError::QubitOutOfRange { gate: *gate, n: self.n });
        }
        for r in &mut self.rows {
            r.conjugate(gate);
        }
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<(), TableauError> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    /// Returns a new tableau with `gate` applied.
    pub fn apply_clifford(&self, gate: &Gate) -> Result<Self, TableauError> {
        let mut t = self.clone();
        t.apply(gate)?;
        Ok(t)
    }

    pub fn apply_frame(&mut self, frame: &LocalCliffordFrame) {
        for r in &mut self.rows {
            frame.conjugate(r);
        }
    }

    /// Simulates `gates` from `|0…0⟩`.
    pub fn simulate(n: usize, gates: &[Gate]) -> Result<Self, TableauError> {
        let mut t = Self::zero_state(n);
        t.apply_all(gates)?;
        Ok(t)
    }

    pub fn contains(&self, p: &PauliString) -> Membership {
        Basis::from_rows(self.n, &self.rows).membership(p)
    }

    /// Index of the first row of `other` that is not a (signed) element of
    /// this group, or `None` if the groups coincide.
    pub fn first_mismatch(&self, other: &StabilizerTableau) -> Option<usize> {
        let basis = Basis::from_rows(self.n, &self.rows);
        other
            .rows
            .iter()
            .position(|r| basis.membership(r) != Membership::Positive)
    }

    /// Same stabilizer group including signs.
    pub fn same_state(&self, other: &StabilizerTableau) -> bool {
        self.n == other.n && self.first_mismatch(other).is_none()
    }

    /// Same stabilizer group ignoring signs (equal up to a Pauli).
    pub fn same_up_to_pauli(&self, other: &StabilizerTableau) -> bool {
        let basis = Basis::from_rows(self.n, &self.rows);
        self.n == other.n && other.rows.iter().all(|r| basis.membership(r) != Membership::Absent)
    }

    /// A Pauli `P` with `P · self · P = target`, when both groups agree up to signs.
    pub fn pauli_correction(&self, target: &StabilizerTableau) -> Option<PauliString> {
        let n = self.n;
        let basis = Basis::from_rows(n, &self.rows);
        // Unknown q = (qx | qz); <q, t_r> = qx·t_r.z + qz·t_r.x must equal the sign flip of row r.
        let mut m = bits::BitMatrix::new(2 * n + 1);
        for t in &target.rows {
            let flip = match basis.membership(t) {
                Membership::Positive => false,
                Membership::Negative => true,
                Membership::Absent => return None,
            };
            let row = m.push_zero_row();
            for q in 0..n {
                let (x, z) = t.get(q);
                bits::set(row, q, z);
                bits::set(row, n + q, x);
            }
            bits::set(row, 2 * n, flip);
        }
        let pivots = m.rref();
        if pivots.last() == Some(&(2 * n)) {
            return None;
        }
        let mut p = PauliString::identity(n);
        for (row, &c) in m.rows.iter().zip(&pivots) {
            if bits::get(row, 2 * n) {
                let (x, z) = p.get(c % n);
                if c < n {
                    p.set(c, true, z);
                } else {
                    p.set(c - n, x, true);
                }
            }
        }
        Some(p)
    }

    /// Converts to `frame · |G⟩`. Hadamards go on the qubits outside the
    /// lowest-index pivot set of the X block, so the result is deterministic.
    pub fn to_graph(&self) -> GraphForm {
        let n = self.n;
        let mut rows = self.rows.clone();
        let mut applied = LocalCliffordFrame::identity(n);

        let x_pivots = eliminate(&mut rows, n, |p, c| p.get(c).0);
        let mut is_pivot = vec![false; n];
        for &c in &x_pivots {
            is_pivot[c] = true;
        }
        for q in (0..n).filter(|&q| !is_pivot[q]) {
            let g = Gate::H(q);
            rows.iter_mut().for_each(|r| r.conjugate(&g));
            applied.push_gate(&g);
        }

        let pivots = eliminate(&mut rows, n, |p, c| p.get(c).0);
        debug_assert_eq!(pivots.len(), n);
        // Row i now has X part e_i.
        for q in 0..n {
            if rows[q].get(q).1 {
                let g = Gate::Sdg(q);
                rows.iter_mut().for_each(|r| r.conjugate(&g));
                applied.push_gate(&g);
            }
        }
        for q in 0..n {
            if rows[q].is_negative() {
                let g = Gate::Z(q);
                rows.iter_mut().for_each(|r| r.conjugate(&g));
                applied.push_gate(&g);
            }
        }
        let mut graph = Graph::new(n);
        for i in 0..n {
            for j in (i + 1)..n {
                if rows[i].get(j).1 {
                    debug_assert!(rows[j].get(i).1, "Z block must be symmetric");
                    graph.toggle_edge(i, j).expect("indices in range");
                }
            }
        }
        GraphForm {
            graph,
            frame: applied.inverse(),
        }
    }

    /// One row per line, `+`/`-` prefixed.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.rows {
            s.push_str(&r.to_string());
            s.push('\n');
        }
        s
    }
}

/// Gauss-Jordan over the first `cols` columns of the bit selected by `bit`,
/// using signed row products. Rows are permuted so pivots come first.
fn eliminate(rows: &mut [PauliString], cols: usize, bit: impl Fn(&PauliString, usize) -> bool) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| bit(&rows[i], c)) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && bit(row, c) {
                row.mul_assign(&pivot);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Row-reduced generating set over the `2n` symplectic columns (x first).
struct Basis {
    n: usize,
    rows: Vec<(usize, PauliString)>,
}

fn sym_bit(p: &PauliString, c: usize, n: usize) -> bool {
    if c < n {
        p.get(c).0
    } else {
        p.get(c - n).1
    }
}

impl Basis {
    fn new(n: usize) -> Self {
        Basis { n, rows: Vec::new() }
    }

    fn from_rows(n: usize, rows: &[PauliString]) -> Self {
        let mut b = Basis::new(n);
        for r in rows {
            b.insert(r.clone());
        }
        b
    }

    /// Reduces `p` against the basis in place (signs tracked when `p` commutes
    /// with every basis row).
    fn reduce(&self, p: &mut PauliString) {
        for (c, row) in &self.rows {
            if sym_bit(p, *c, self.n) {
                p.mul_assign(row);
            }
        }
    }

    /// Adds `p` unless it is dependent; returns whether it was added.
    fn insert(&mut self, mut p: PauliString) -> bool {
        let n = self.n;
        for (c, row) in &self.rows {
            if sym_bit(&p, *c, n) {
                p.mul_assign(row);
            }
        }
        let Some(c) = (0..2 * n).find(|&c| sym_bit(&p, c, n)) else {
            return false;
        };
        self.rows.push((c, p));
        true
    }

    fn membership(&self, p: &PauliString) -> Membership {
        if self.rows.iter().any(|(_, r)| r.anticommutes(p)) {
            return Membership::Absent;
        }
        let mut p = p.clone();
        self.reduce(&mut p);
        if !p.is_identity() {
            Membership::Absent
        } else if p.is_negative() {
            Membership::Negative
        } else {
            Membership::Positive
        }
    }
}

/// Frame turning `from` into `to` up to a Pauli, if one exists.
pub fn local_dressing(from: &StabilizerTableau, to: &StabilizerTableau) -> Option<LocalCliffordFrame> {
    if from.n != to.n {
        return None;
    }
    let a = from.to_graph();
    let b = to.to_graph();
    let u = find_lc_equivalence(&a.graph, &b.graph)?;
    let mut dressing = a.frame.inverse().then(&u).then(&b.frame);
    let mut moved = from.clone();
    moved.apply_frame(&dressing);
    let p = moved.pauli_correction(to)?;
    for q in 0..from.n {
        let (x, z) = p.get(q);
        let fix = match (x, z) {
            (false, false) => continue,
            (true, false) => Gate::X(q),
            (true, true) => Gate::Y(q),
            (false, true) => Gate::Z(q),
        };
        dressing.push_gate(&fix);
    }
    Some(dressing)
}

/// Simulates `gates` from `|0…0⟩` and compares with `target`.
pub fn verify_circuit(n: usize, gates: &[Gate], target: &StabilizerTableau) -> Result<Verdict, TableauError> {
    if n != target.n() {
        return Err(TableauError::Ragged { row: 0, expected: target.n(), got: n });
    }
    let out = StabilizerTableau::simulate(n, gates)?;
    let Some(row) = out.first_mismatch(target) else {
        return Ok(Verdict::Exact);
    };
    if let Some(d) = local_dressing(&out, target) {
        let mut check = out.clone();
        check.apply_frame(&d);
        if check.same_state(target) {
            return Ok(Verdict::UpToLocalClifford(d));
        }
    }
    Ok(Verdict::Fail {
        row,
        generator: target.rows[row].to_string(),
    })
}

impl fmt::Display for StabilizerTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Debug for StabilizerTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.rows.iter().map(|r| r.to_string()).collect();
        write!(f, "StabilizerTableau{rows:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_gates(n: usize, len: usize, rng: &mut impl Rng) -> Vec<Gate> {
        (0..len)
            .map(|_| {
                let a = rng.gen_range(0..n);
                let mut b = rng.gen_range(0..n);
                while n > 1 && b == a {
                    b = rng.gen_range(0..n);
                }
                match rng.gen_range(0..if n > 1 { 11 } else { 8 }) {
                    0 => Gate::H(a),
                    1 => Gate::S(a),
                    2 => Gate::Sdg(a),
                    3 => Gate::SqrtX(a),
                    4 => Gate::SqrtXdg(a),
                    5 => Gate::X(a),
                    6 => Gate::Y(a),
                    7 => Gate::Z(a),
                    8 => Gate::Cz(a, b),
                    9 => Gate::Cx(a, b),
                    _ => Gate::Cy(a, b),
                }
            })
            .collect()
    }

    #[test]
    fn parse_examples_and_errors() {
        let bell = StabilizerTableau::parse_lines(&["XX", "ZZ"]).unwrap();
        assert_eq!(bell.n(), 2);
        StabilizerTableau::parse_lines(&["XXX", "ZZI", "IZZ"]).unwrap();
        assert_eq!(
            StabilizerTableau::parse_lines(&["XX", "XX"]),
            Err(TableauError::Dependent { row: 1 })
        );
        assert_eq!(
            StabilizerTableau::parse_lines(&["XI", "ZI"]),
            Err(TableauError::NonCommuting { row: 1, other: 0 })
        );
        assert_eq!(
            StabilizerTableau::parse_lines(&["XX", "Z"]),
            Err(TableauError::Ragged { row: 1, expected: 2, got: 1 })
        );
        assert!(matches!(
            StabilizerTableau::parse_lines(&["XX", "ZA"]),
            Err(TableauError::Parse { row: 1, .. })
        ));
        assert!(matches!(
            StabilizerTableau::parse_lines(&["XX"]),
            Err(TableauError::Underdetermined { .. })
        ));
    }

    #[test]
    fn apply_examples() {
        let t = StabilizerTableau::parse_lines(&["Z"]).unwrap();
        assert_eq!(t.apply_clifford(&Gate::H(0)).unwrap().to_text(), "+X\n");
        let bell = StabilizerTableau::parse_lines(&["XX", "ZZ"]).unwrap();
        let after = bell.apply_clifford(&Gate::Cx(0, 1)).unwrap();
        assert!(after.same_state(&StabilizerTableau::parse_lines(&["XI", "IZ"]).unwrap()));
        let ghz = StabilizerTableau::parse_lines(&["XXX", "ZZI", "IZZ"]).unwrap();
        let twice = ghz.apply_clifford(&Gate::Cz(0, 1)).unwrap().apply_clifford(&Gate::Cz(0, 1)).unwrap();
        assert_eq!(twice, ghz);
        assert!(matches!(ghz.apply_clifford(&Gate::H(3)), Err(TableauError::QubitOutOfRange { .. })));
    }

    #[test]
    fn membership_tracks_signs() {
        let bell = StabilizerTableau::parse_lines(&["XX", "ZZ"]).unwrap();
        assert_eq!(bell.contains(&PauliString::parse("YY").unwrap()), Membership::Negative);
        assert_eq!(bell.contains(&PauliString::parse("-YY").unwrap()), Membership::Positive);
        assert_eq!(bell.contains(&PauliString::parse("XI").unwrap()), Membership::Absent);
        assert_eq!(bell.contains(&PauliString::parse("XY").unwrap()), Membership::Absent);
    }

    #[test]
    fn graph_state_is_a_fixed_point() {
        let g = Graph::cycle(5);
        let form = StabilizerTableau::graph_state(&g).to_graph();
        assert_eq!(form.graph, g);
        assert!(form.frame.is_identity());
    }

    #[test]
    fn small_conversions() {
        let bell = StabilizerTableau::parse_lines(&["XX", "ZZ"]).unwrap();
        let form = bell.to_graph();
        assert_eq!(form.graph.edge_count(), 1);
        let ghz = StabilizerTableau::parse_lines(&["XXX", "ZZI", "IZZ"]).unwrap();
        let form = ghz.to_graph();
        assert!(form.graph.edge_count() == 2 || form.graph.edge_count() == 3);
        for t in [bell, ghz] {
            let form = t.to_graph();
            let mut rebuilt = StabilizerTableau::graph_state(&form.graph);
            rebuilt.apply_frame(&form.frame);
            assert!(rebuilt.same_state(&t));
        }
    }

    #[test]
    fn to_graph_round_trips_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.gen_range(1..=12);
            let gates = random_gates(n, 6 * n, &mut rng);
            let t = StabilizerTableau::simulate(n, &gates).unwrap();
            let form = t.to_graph();
            for i in 0..n {
                assert!(!form.graph.has_edge(i, i));
            }
            let mut rebuilt = StabilizerTableau::graph_state(&form.graph);
            rebuilt.apply_frame(&form.frame);
            assert!(rebuilt.same_state(&t), "{t:?} -> {:?}", form.graph);
            // Graph generators stabilize the frame-stripped state.
            let mut stripped = t.clone();
            stripped.apply_frame(&form.frame.inverse());
            for g in StabilizerTableau::graph_state(&form.graph).rows() {
                assert_eq!(stripped.contains(g), Membership::Positive);
            }
        }
    }

    #[test]
    fn verify_verdicts() {
        let g = Graph::path(4);
        let target = StabilizerTableau::graph_state(&g);
        let mut gates: Vec<Gate> = (0..4).map(Gate::H).collect();
        gates.extend(g.edges().map(|(a, b)| Gate::Cz(a, b)));
        assert_eq!(verify_circuit(4, &gates, &target).unwrap(), Verdict::Exact);

        let mut dressed = gates.clone();
        dressed.extend([Gate::S(1), Gate::H(2), Gate::SqrtX(3), Gate::Y(0)]);
        match verify_circuit(4, &dressed, &target).unwrap() {
            Verdict::UpToLocalClifford(_) => {}
            v => panic!("expected LC verdict, got {v:?}"),
        }

        let broken: Vec<Gate> = gates.iter().copied().filter(|g| *g != Gate::Cz(1, 2)).collect();
        assert!(matches!(verify_circuit(4, &broken, &target).unwrap(), Verdict::Fail { .. }));
    }

    #[test]
    fn lc_equivalence_of_star_and_complete() {
        let star = Graph::star(5, 0);
        let complete = Graph::complete(5);
        let u = find_lc_equivalence(&star, &complete).expect("LC equivalent");
        let mut t = StabilizerTableau::graph_state(&star);
        t.apply_frame(&u);
        assert!(t.same_up_to_pauli(&StabilizerTableau::graph_state(&complete)));
        assert!(find_lc_equivalence(&Graph::path(4), &Graph::new(4)).is_none());
        // The 4-path and the 4-star lie in different orbits.
        assert!(find_lc_equivalence(&Graph::path(4), &Graph::star(4, 0)).is_none());
    }
}
