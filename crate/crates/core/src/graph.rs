//! Graph states as packed adjacency bit matrices, and the exact edge-level
//! effect of local complementation and of CZ / CX / CY gates on them.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("node {node} out of range for graph on {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("action operands must differ, got ({0}, {0})")]
    DegenerateAction(usize),
}

/// Which two-qubit gate an [`Action`] applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActionKind {
    Cz,
    Cx,
    Cy,
}

impl ActionKind {
    pub fn name(self) -> &'static str {
        match self {
            ActionKind::Cz => "CZ",
            ActionKind::Cx => "CX",
            ActionKind::Cy => "CY",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "CZ" => Some(ActionKind::Cz),
            "CX" | "CNOT" => Some(ActionKind::Cx),
            "CY" => Some(ActionKind::Cy),
            _ => None,
        }
    }
}

/// One decimation move: a two-qubit gate applied to the graph state.
///
/// For `Cz` the pair is unordered and stored with `a < b`. For `Cx` and `Cy`,
/// `a` is the control and `b` the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action {
    kind: ActionKind,
    a: u16,
    b: u16,
}

impl Action {
    #[inline]
    pub fn new(kind: ActionKind, a: usize, b: usize) -> Result<Self, GraphError> {
        if a == b {
            return Err(GraphError::DegenerateAction(a));
        }
        let (a, b) = match kind {
            ActionKind::Cz if a > b => (b, a),
            _ => (a, b),
        };
        Ok(Action {
            kind,
            a: a as u16,
            b: b as u16,
        })
    }

    /// # Panics
    /// If `i == j`.
    #[inline]
    pub fn cz(i: usize, j: usize) -> Self {
        Self::new(ActionKind::Cz, i, j).expect("CZ operands must differ")
    }

    /// # Panics
    /// If `control == target`.
    #[inline]
    pub fn cx(control: usize, target: usize) -> Self {
        Self::new(ActionKind::Cx, control, target).expect("CX operands must differ")
    }

    /// # Panics
    /// If `control == target`.
    #[inline]
    pub fn cy(control: usize, target: usize) -> Self {
        Self::new(ActionKind::Cy, control, target).expect("CY operands must differ")
    }

    #[inline]
    pub fn kind(&self) -> ActionKind {
        self.kind
    }

    #[inline]
    pub fn a(&self) -> usize {
        self.a as usize
    }

    #[inline]
    pub fn b(&self) -> usize {
        self.b as usize
    }

    pub fn touches(&self, q: usize) -> bool {
        self.a() == q || self.b() == q
    }

    fn check(&self, n: usize) -> Result<(), GraphError> {
        for node in [self.a(), self.b()] {
            if node >= n {
                return Err(GraphError::NodeOutOfRange { node, n });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {},{}", self.kind.name(), self.a, self.b)
    }
}

/// Simple undirected graph on `n` nodes, stored as symmetric packed bit rows
/// with a zero diagonal. Degrees and the edge count are cached.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
    degrees: Vec<u32>,
    edges: usize,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        let words = bits::words_for(n.max(1));
        Graph {
            n,
            words,
            rows: vec![0; n * words],
            degrees: vec![0; n],
            edges: 0,
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Graph::new(n);
        for &(i, j) in edges {
            g.check_node(i)?;
            g.check_node(j)?;
            if i == j {
                return Err(GraphError::SelfLoop(i));
            }
            if !g.has_edge(i, j) {
                g.toggle_unchecked(i, j);
            }
        }
        Ok(g)
    }

    /// Builds a graph from a symmetric boolean adjacency matrix (upper triangle is read).
    pub fn from_adjacency(adj: &[Vec<bool>]) -> Self {
        let n = adj.len();
        let mut g = Graph::new(n);
        for i in 0..n {
            for j in i + 1..n {
                if adj[i][j] {
                    g.toggle_unchecked(i, j);
                }
            }
        }
        g
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::new(n);
        for i in 0..n {
            for j in i + 1..n {
                g.toggle_unchecked(i, j);
            }
        }
        g
    }

    pub fn star(n: usize, center: usize) -> Self {
        let mut g = Graph::new(n);
        for j in (0..n).filter(|&j| j != center) {
            g.toggle_unchecked(center, j);
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Graph::new(n);
        if n >= 3 {
            for i in 0..n {
                g.toggle_unchecked(i, (i + 1) % n);
            }
        } else if n == 2 {
            g.toggle_unchecked(0, 1);
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = Graph::new(n);
        for i in 1..n {
            g.toggle_unchecked(i - 1, i);
        }
        g
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.degrees[i] as usize
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0) as usize
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        bits::get(self.row(i), j)
    }

    #[inline]
    pub(crate) fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.words..(i + 1) * self.words]
    }

    /// Number of common neighbours of `i` and `j`.
    #[inline]
    pub fn common_neighbors(&self, i: usize, j: usize) -> usize {
        bits::and_popcount(self.row(i), self.row(j)) as usize
    }

    pub fn neighborhood(&self, i: usize) -> Result<Vec<usize>, GraphError> {
        self.check_node(i)?;
        Ok(bits::ones(self.row(i)).collect())
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        bits::ones(self.row(i))
    }

    /// Edges as `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.neighbors(i).filter(move |&j| j > i).map(move |j| (i, j)))
    }

    pub fn is_edgeless(&self) -> bool {
        self.edges == 0
    }

    fn check_node(&self, i: usize) -> Result<(), GraphError> {
        if i >= self.n {
            Err(GraphError::NodeOutOfRange { node: i, n: self.n })
        } else {
            Ok(())
        }
    }

    #[inline]
    fn toggle_unchecked(&mut self, i: usize, j: usize) {
        debug_assert_ne!(i, j);
        let w = self.words;
        let present = bits::get(&self.rows[i * w..(i + 1) * w], j);
        bits::flip(&mut self.rows[i * w..(i + 1) * w], j);
        bits::flip(&mut self.rows[j * w..(j + 1) * w], i);
        if present {
            self.degrees[i] -= 1;
            self.degrees[j] -= 1;
            self.edges -= 1;
        } else {
            self.degrees[i] += 1;
            self.degrees[j] += 1;
            self.edges += 1;
        }
    }

    pub fn toggle_edge(&mut self, i: usize, j: usize) -> Result<(), GraphError> {
        self.check_node(i)?;
        self.check_node(j)?;
        if i == j {
            return Err(GraphError::SelfLoop(i));
        }
        self.toggle_unchecked(i, j);
        Ok(())
    }

    /// Toggles `{i, k}` for every `k` set in `mask`, skipping `k == i`.
    fn toggle_row_with(&mut self, i: usize, mask: &[u64]) {
        let targets: Vec<usize> = bits::ones(mask).filter(|&k| k != i).collect();
        for k in targets {
            self.toggle_unchecked(i, k);
        }
    }

    /// Local complementation at `i`: complements every edge inside `n(i)`.
    pub fn local_complement(&self, i: usize) -> Result<Graph, GraphError> {
        let mut g = self.clone();
        g.local_complement_in_place(i)?;
        Ok(g)
    }

    pub fn local_complement_in_place(&mut self, i: usize) -> Result<(), GraphError> {
        self.check_node(i)?;
        let nbrs: Vec<usize> = self.neighbors(i).collect();
        for (x, &j) in nbrs.iter().enumerate() {
            for &k in &nbrs[x + 1..] {
                self.toggle_unchecked(j, k);
            }
        }
        Ok(())
    }

    /// Pivot along the edge `{i, j}`: `LC_i LC_j LC_i`.
    pub fn pivot_in_place(&mut self, i: usize, j: usize) -> Result<(), GraphError> {
        self.local_complement_in_place(i)?;
        self.local_complement_in_place(j)?;
        self.local_complement_in_place(i)
    }

    /// The node set whose edges to the acting node are toggled by `a`,
    /// i.e. `{j}` for CZ, `n(j) \ {i}` for CX and `(n(j) ∪ {j}) \ {i}` for CY.
    fn toggle_mask(&self, a: &Action) -> (usize, Vec<u64>) {
        let (i, j) = (a.a(), a.b());
        let mut mask = vec![0u64; self.words];
        match a.kind() {
            ActionKind::Cz => bits::set(&mut mask, j, true),
            ActionKind::Cx => {
                mask.copy_from_slice(self.row(j));
                bits::set(&mut mask, i, false);
            }
            ActionKind::Cy => {
                mask.copy_from_slice(self.row(j));
                bits::set(&mut mask, j, true);
                bits::set(&mut mask, i, false);
            }
        }
        (i, mask)
    }

    /// Edges `{i, k}` toggled by the action, with `i` the acting node.
    pub fn action_toggles(&self, a: &Action) -> Result<Vec<(usize, usize)>, GraphError> {
        a.check(self.n)?;
        let (i, mask) = self.toggle_mask(a);
        Ok(bits::ones(&mask).map(|k| (i, k)).collect())
    }

    /// Applies the graph action of a CZ, CX or CY gate.
    ///
    /// For adjacent control/target pairs the generalized rule (skip `k = i`) is
    /// used; the resulting state differs from the gate's output by a Pauli Z on
    /// the control, which is not tracked here.
    pub fn apply_action(&self, a: &Action) -> Result<Graph, GraphError> {
        let mut g = self.clone();
        g.apply_action_in_place(a)?;
        Ok(g)
    }

    pub fn apply_action_in_place(&mut self, a: &Action) -> Result<(), GraphError> {
        a.check(self.n)?;
        self.apply_action_unchecked(a);
        Ok(())
    }

    #[inline]
    pub(crate) fn apply_action_unchecked(&mut self, a: &Action) {
        if a.kind() == ActionKind::Cz {
            self.toggle_unchecked(a.a(), a.b());
        } else {
            let (i, mask) = self.toggle_mask(a);
            self.toggle_row_with(i, &mask);
        }
    }

    /// Edges removed by `a` (negative if it adds edges), without building the new graph.
    pub fn edge_delta(&self, a: &Action) -> Result<i64, GraphError> {
        a.check(self.n)?;
        Ok(self.edge_delta_unchecked(a))
    }

    #[inline]
    pub(crate) fn edge_delta_unchecked(&self, a: &Action) -> i64 {
        let (i, j) = (a.a(), a.b());
        let adj = self.has_edge(i, j) as i64;
        match a.kind() {
            ActionKind::Cz => 2 * adj - 1,
            ActionKind::Cx => {
                let common = self.common_neighbors(i, j) as i64;
                cx_delta(common, self.degree(j) as i64, adj)
            }
            ActionKind::Cy => {
                let common = self.common_neighbors(i, j) as i64;
                cy_delta(common, self.degree(j) as i64, adj)
            }
        }
    }

    /// Rewrites `a` to the cheapest gate with the identical graph action:
    /// any action toggling exactly one edge becomes a CZ on that edge.
    pub fn canonical_action(&self, a: &Action) -> Action {
        let (i, j) = (a.a(), a.b());
        // Others toggled besides the acting node: n(j) \ {i}, plus j itself for CY.
        let others = self.degree(j) - bits::get(self.row(j), i) as usize;
        match a.kind() {
            ActionKind::Cz => *a,
            ActionKind::Cx if others == 1 => {
                let k = bits::ones(self.row(j)).find(|&k| k != i).expect("one other neighbour");
                Action::cz(i, k)
            }
            ActionKind::Cy if others == 0 => Action::cz(i, j),
            _ => *a,
        }
    }

    /// Upper-triangle adjacency bits in row-major pair order `(0,1), (0,2), ..., (n-2,n-1)`.
    pub fn upper_triangle(&self) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.n * self.n.saturating_sub(1) / 2);
        for i in 0..self.n {
            for j in i + 1..self.n {
                out.push(self.has_edge(i, j));
            }
        }
        out
    }

    /// Two-colouring `(A, B)` if the graph is bipartite. Isolated nodes go to `A`.
    pub fn bipartition(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        let mut color: Vec<Option<bool>> = vec![None; self.n];
        for start in 0..self.n {
            if color[start].is_some() {
                continue;
            }
            color[start] = Some(false);
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                let cv = color[v].unwrap();
                for w in self.neighbors(v) {
                    match color[w] {
                        None => {
                            color[w] = Some(!cv);
                            stack.push(w);
                        }
                        Some(cw) if cw == cv => return None,
                        _ => {}
                    }
                }
            }
        }
        let a = (0..self.n).filter(|&v| color[v] == Some(false)).collect();
        let b = (0..self.n).filter(|&v| color[v] == Some(true)).collect();
        Some((a, b))
    }

    /// Sorted edge list, convenient for assertions and serialization.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        self.edges().collect()
    }
}

/// Net edges removed by CX(i→j) given `|n(i) ∩ n(j)|`, `deg(j)` and adjacency of `i, j`.
#[inline]
pub(crate) fn cx_delta(common: i64, deg_target: i64, adj: i64) -> i64 {
    2 * common - (deg_target - adj)
}

/// Net edges removed by CY(i→j), same arguments as [`cx_delta`].
#[inline]
pub(crate) fn cy_delta(common: i64, deg_target: i64, adj: i64) -> i64 {
    2 * (common + adj) - (deg_target + 1 - adj)
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.n, self.edge_list())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // 4-cycle 1-2-3-4-1 relabelled to 0-1-2-3-0.
    fn four_cycle() -> Graph {
        Graph::cycle(4)
    }

    fn triangle() -> Graph {
        Graph::complete(3)
    }

    #[test]
    fn neighborhood_examples() {
        assert_eq!(four_cycle().neighborhood(2).unwrap(), vec![1, 3]);
        assert!(Graph::new(3).neighborhood(1).unwrap().is_empty());
        assert_eq!(Graph::star(8, 0).neighborhood(0).unwrap(), (1..8).collect::<Vec<_>>());
        assert_eq!(
            four_cycle().neighborhood(4),
            Err(GraphError::NodeOutOfRange { node: 4, n: 4 })
        );
    }

    #[test]
    fn local_complement_examples() {
        let g = triangle().local_complement(0).unwrap();
        assert_eq!(g.edge_list(), vec![(0, 1), (0, 2)]);
        for n in 2..9 {
            assert_eq!(Graph::star(n, 0).local_complement(0).unwrap(), Graph::complete(n));
        }
        let g = four_cycle();
        assert_eq!(g.local_complement(1).unwrap().local_complement(1).unwrap(), g);
    }

    #[test]
    fn apply_action_examples() {
        let g = four_cycle().apply_action(&Action::cx(0, 2)).unwrap();
        assert_eq!(g.edge_list(), vec![(1, 2), (2, 3)]);
        let g = Graph::new(3).apply_action(&Action::cz(0, 1)).unwrap();
        assert_eq!(g.edge_list(), vec![(0, 1)]);
        let g = Graph::complete(4).apply_action(&Action::cy(0, 1)).unwrap();
        assert_eq!(g.edge_list(), vec![(1, 2), (1, 3), (2, 3)]);
        assert!(matches!(
            Graph::new(3).apply_action(&Action::cz(0, 5)),
            Err(GraphError::NodeOutOfRange { node: 5, .. })
        ));
    }

    #[test]
    fn edge_delta_examples() {
        assert_eq!(four_cycle().edge_delta(&Action::cx(0, 2)).unwrap(), 2);
        assert_eq!(Graph::new(2).edge_delta(&Action::cz(0, 1)).unwrap(), -1);
        assert_eq!(Graph::complete(4).edge_delta(&Action::cy(0, 1)).unwrap(), 3);
    }

    #[test]
    fn max_degree_examples() {
        assert_eq!(Graph::star(8, 0).max_degree(), 7);
        assert_eq!(Graph::new(5).max_degree(), 0);
    }

    #[test]
    fn degenerate_action_rejected() {
        assert_eq!(Action::new(ActionKind::Cx, 2, 2), Err(GraphError::DegenerateAction(2)));
        assert_eq!(Action::cz(3, 1), Action::cz(1, 3));
        assert_ne!(Action::cx(3, 1), Action::cx(1, 3));
    }

    #[test]
    fn canonical_action_collapses_single_toggles() {
        // CY onto a leaf attached to the control only toggles the edge itself.
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(g.canonical_action(&Action::cy(0, 1)), Action::cy(0, 1));
        let leaf = Graph::from_edges(3, &[(0, 1)]).unwrap();
        assert_eq!(leaf.canonical_action(&Action::cy(0, 1)), Action::cz(0, 1));
        // CX onto a degree-one target toggles one edge to the target's neighbour.
        assert_eq!(g.canonical_action(&Action::cx(0, 2)), Action::cz(0, 1));
    }

    #[test]
    fn bipartition_detects_odd_cycles() {
        assert!(Graph::cycle(4).bipartition().is_some());
        assert!(Graph::cycle(5).bipartition().is_none());
        let (a, b) = Graph::star(5, 0).bipartition().unwrap();
        assert_eq!(a, vec![0]);
        assert_eq!(b, vec![1, 2, 3, 4]);
    }

    #[test]
    fn large_graph_uses_multiple_words() {
        let mut g = Graph::new(130);
        g.toggle_edge(0, 129).unwrap();
        g.toggle_edge(64, 129).unwrap();
        assert_eq!(g.common_neighbors(0, 64), 1);
        assert_eq!(g.edge_delta(&Action::cx(0, 64)).unwrap(), 1);
        assert_eq!(g.edge_list(), vec![(0, 129), (64, 129)]);
    }
}
