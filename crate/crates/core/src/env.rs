//! The decimation environment: graph states, two-qubit gate actions, masking
//! and edge-based scoring.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits;
use crate::graph::{cx_delta, cy_delta, Action, ActionKind, Graph, GraphError};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("graph is already edgeless")]
    Terminal,
    #[error("action {0} does not remove an edge")]
    Masked(Action),
    #[error("layer penalty must lie in [0, 1), got {0}")]
    BadPenalty(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreParams<S> {
    pub layer_penalty: S,
    pub normalize_by_edges: bool,
}

impl<S: Scalar> ScoreParams<S> {
    pub fn new(layer_penalty: S, normalize_by_edges: bool) -> Result<Self, EnvError> {
        let p = ScoreParams { layer_penalty, normalize_by_edges };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        let v = self.layer_penalty.as_f64();
        if !(0.0..1.0).contains(&v) {
            return Err(EnvError::BadPenalty(v));
        }
        Ok(())
    }
}

impl<S: Scalar> Default for ScoreParams<S> {
    fn default() -> Self {
        ScoreParams {
            layer_penalty: S::of(0.1),
            normalize_by_edges: false,
        }
    }
}

/// Restriction of the action set for bipartite graphs: only CZ across the
/// parts and CX inside a part, so the bipartition survives every step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartite {
    side: Vec<bool>,
}

impl Bipartite {
    pub fn of(g: &Graph) -> Option<Self> {
        let (_, b) = g.bipartition()?;
        let mut side = vec![false; g.n()];
        for v in b {
            side[v] = true;
        }
        Some(Bipartite { side })
    }

    pub fn side(&self, v: usize) -> bool {
        self.side[v]
    }

    #[inline]
    pub fn allows(&self, a: &Action) -> bool {
        let same = self.side[a.a()] == self.side[a.b()];
        match a.kind() {
            ActionKind::Cz => !same,
            ActionKind::Cx => same,
            ActionKind::Cy => false,
        }
    }
}

/// Number of unmasked actions on `n` nodes: one CZ per pair, CX and CY per ordered pair.
pub fn action_count(n: usize) -> usize {
    5 * n * n.saturating_sub(1) / 2
}

/// Position of `a` in [`for_each_action`] order on `n` nodes.
pub fn action_index(n: usize, a: &Action) -> usize {
    let (i, j) = (a.a().min(a.b()), a.a().max(a.b()));
    let pair = i * n - i * (i + 1) / 2 + (j - i - 1);
    let forward = a.a() == i;
    let slot = match a.kind() {
        ActionKind::Cz => 0,
        ActionKind::Cx if forward => 1,
        ActionKind::Cx => 2,
        ActionKind::Cy if forward => 3,
        ActionKind::Cy => 4,
    };
    5 * pair + slot
}

/// Inverse of [`action_index`]; `None` past the last action.
pub fn action_at(n: usize, index: usize) -> Option<Action> {
    if index >= action_count(n) {
        return None;
    }
    let (mut pair, slot) = (index / 5, index % 5);
    let mut i = 0;
    while pair >= n - i - 1 {
        pair -= n - i - 1;
        i += 1;
    }
    let j = i + 1 + pair;
    Some(match slot {
        0 => Action::cz(i, j),
        1 => Action::cx(i, j),
        2 => Action::cx(j, i),
        3 => Action::cy(i, j),
        _ => Action::cy(j, i),
    })
}

/// Calls `f(action, delta)` for every action on `g`, pair by pair in the
/// order `CZ(i,j), CX(i→j), CX(j→i), CY(i→j), CY(j→i)` for `i < j`.
#[inline]
pub fn for_each_action(g: &Graph, mut f: impl FnMut(Action, i64)) {
    let n = g.n();
    for i in 0..n {
        let ri = g.row(i);
        let di = g.degree(i) as i64;
        for j in i + 1..n {
            let rj = g.row(j);
            let dj = g.degree(j) as i64;
            let adj = bits::get(ri, j) as i64;
            let common = bits::and_popcount(ri, rj) as i64;
            f(Action::cz(i, j), 2 * adj - 1);
            f(Action::cx(i, j), cx_delta(common, dj, adj));
            f(Action::cx(j, i), cx_delta(common, di, adj));
            f(Action::cy(i, j), cy_delta(common, dj, adj));
            f(Action::cy(j, i), cy_delta(common, di, adj));
        }
    }
}

/// [`for_each_action`] restricted to what `bip` allows, skipping the
/// forbidden kinds outright instead of filtering them.
pub fn for_each_allowed_action(g: &Graph, bip: Option<&Bipartite>, mut f: impl FnMut(Action, i64)) {
    let Some(bip) = bip else {
        return for_each_action(g, f);
    };
    let n = g.n();
    for i in 0..n {
        let ri = g.row(i);
        for j in i + 1..n {
            let adj = bits::get(ri, j) as i64;
            if bip.side[i] != bip.side[j] {
                f(Action::cz(i, j), 2 * adj - 1);
            } else {
                let rj = g.row(j);
                let common = bits::and_popcount(ri, rj) as i64;
                f(Action::cx(i, j), cx_delta(common, g.degree(j) as i64, adj));
                f(Action::cx(j, i), cx_delta(common, g.degree(i) as i64, adj));
            }
        }
    }
}

/// All actions, or with `masked` only those removing at least one edge net.
pub fn enumerate_actions(g: &Graph, masked: bool) -> Vec<Action> {
    let mut out = Vec::with_capacity(if masked { 0 } else { action_count(g.n()) });
    for_each_action(g, |a, d| {
        if !masked || d >= 1 {
            out.push(a);
        }
    });
    out
}

/// Decimation trajectory state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvState {
    initial: Graph,
    graph: Graph,
    action_log: Vec<Action>,
    layer: Vec<u64>,
    layers: usize,
}

impl EnvState {
    pub fn new(g: Graph) -> Self {
        let w = bits::words_for(g.n().max(1));
        EnvState {
            initial: g.clone(),
            graph: g,
            action_log: Vec::new(),
            layer: vec![0; w],
            layers: 0,
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn initial(&self) -> &Graph {
        &self.initial
    }

    pub fn step_index(&self) -> usize {
        self.action_log.len()
    }

    pub fn action_log(&self) -> &[Action] {
        &self.action_log
    }

    /// Greedy layer count of the trajectory so far.
    pub fn layers(&self) -> usize {
        self.layers
    }

    /// Qubits touched in the current greedy layer.
    pub fn layer_occupancy(&self) -> Vec<bool> {
        (0..self.graph.n()).map(|q| bits::get(&self.layer, q)).collect()
    }

    /// Whether `a` (after canonicalization) touches a qubit of the current layer.
    #[inline]
    pub fn opens_layer(&self, a: &Action) -> bool {
        let a = if a.kind() == ActionKind::Cz { *a } else { self.graph.canonical_action(a) };
        self.layers == 0 || bits::get(&self.layer, a.a()) || bits::get(&self.layer, a.b())
    }

    pub fn is_terminal(&self) -> bool {
        self.graph.is_edgeless()
    }

    /// Applies `a` (canonicalized). With `masked`, refuses actions on a
    /// terminal graph and actions with net delta below one.
    pub fn step(&mut self, a: Action, masked: bool) -> Result<i64, EnvError> {
        let delta = self.graph.edge_delta(&a)?;
        if masked {
            if self.is_terminal() {
                return Err(EnvError::Terminal);
            }
            if delta < 1 {
                return Err(EnvError::Masked(a));
            }
        }
        self.step_unchecked(a, delta);
        Ok(delta)
    }

    #[inline]
    pub(crate) fn step_unchecked(&mut self, a: Action, _delta: i64) {
        let a = self.graph.canonical_action(&a);
        if self.opens_layer(&a) {
            self.layer.iter_mut().for_each(|w| *w = 0);
            self.layers += 1;
        }
        bits::set(&mut self.layer, a.a(), true);
        bits::set(&mut self.layer, a.b(), true);
        self.graph.apply_action_unchecked(&a);
        self.action_log.push(a);
    }

    pub fn score_action<S: Scalar>(&self, a: &Action, p: &ScoreParams<S>) -> Result<S, EnvError> {
        let delta = self.graph.edge_delta(a)?;
        Ok(score(delta, self.graph.edge_count(), self.opens_layer(a), p))
    }

    /// Upper-triangle adjacency bits.
    pub fn observe(&self) -> Vec<bool> {
        self.graph.upper_triangle()
    }

    /// Observation followed by the selected extra features: per-action edge
    /// deltas (in [`for_each_action`] order) and the current-layer occupancy.
    pub fn observe_with(&self, deltas: bool, occupancy: bool) -> Observation {
        Observation {
            adjacency: self.observe(),
            deltas: deltas.then(|| {
                let mut v = Vec::with_capacity(action_count(self.graph.n()));
                for_each_action(&self.graph, |_, d| v.push(d));
                v
            }),
            occupancy: occupancy.then(|| self.layer_occupancy()),
        }
    }

    /// Rebuilds a state by replaying a log from `initial`.
    pub fn replay(initial: Graph, log: &[Action]) -> Result<Self, EnvError> {
        let mut s = EnvState::new(initial);
        for a in log {
            s.step(*a, false)?;
        }
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub adjacency: Vec<bool>,
    pub deltas: Option<Vec<i64>>,
    pub occupancy: Option<Vec<bool>>,
}

#[inline]
pub(crate) fn score<S: Scalar>(delta: i64, edges: usize, opens: bool, p: &ScoreParams<S>) -> S {
    let mut s = S::of_i64(delta);
    if p.normalize_by_edges && edges > 0 {
        s = s / S::of_i64(edges as i64);
    }
    if opens {
        s = s - p.layer_penalty;
    }
    s
}
