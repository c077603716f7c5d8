//! Local-complementation orbit exploration and simulated annealing over it.

use std::collections::{HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gate::Gate;
use crate::graph::Graph;
use crate::scalar::Scalar;
use crate::tableau::LocalCliffordFrame;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveSet {
    SingleLc,
    Pivot,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule<S> {
    /// `None` picks the standard deviation of 100 random probe deltas.
    pub initial_temperature: Option<S>,
    pub cooling_factor: S,
    pub steps: usize,
    pub w_edges: S,
    pub w_maxdeg: S,
    pub move_set: MoveSet,
    pub seed: u64,
}

impl<S: Scalar> Default for AnnealSchedule<S> {
    fn default() -> Self {
        AnnealSchedule {
            initial_temperature: None,
            cooling_factor: S::of(0.999),
            steps: 20_000,
            w_edges: S::one(),
            w_maxdeg: S::zero(),
            move_set: MoveSet::SingleLc,
            seed: 0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LcOptError {
    #[error("invalid schedule: {0}")]
    Schedule(&'static str),
    #[error("orbit exceeds {cap} graphs")]
    OrbitCap { cap: usize, partial: Vec<Graph> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnealResult<S> {
    pub graph: Graph,
    /// Local complementations, in order, taking the input to `graph`.
    pub moves: Vec<usize>,
    pub objective: S,
    pub initial_objective: S,
}

pub fn objective<S: Scalar>(g: &Graph, w_edges: S, w_maxdeg: S) -> S {
    w_edges * S::of_i64(g.edge_count() as i64) + w_maxdeg * S::of_i64(g.max_degree() as i64)
}

/// Local Clifford `U_v = √X_v ∏_{w ∈ n(v)} S†_w` with `|LC_v(G)⟩ = U_v |G⟩` up to a Pauli.
pub fn lc_unitary(g: &Graph, v: usize) -> Vec<Gate> {
    let mut gates = vec![Gate::SqrtX(v)];
    gates.extend(g.neighbors(v).map(Gate::Sdg));
    gates
}

/// Applies the local complementations in `moves` and returns the final graph
/// with the local Clifford `U` such that `|G'⟩ = U |G⟩` up to a Pauli.
pub fn lc_frame(g: &Graph, moves: &[usize]) -> (Graph, LocalCliffordFrame) {
    let mut g = g.clone();
    let mut u = LocalCliffordFrame::identity(g.n());
    for &v in moves {
        for gate in lc_unitary(&g, v) {
            u.push_gate(&gate);
        }
        g.local_complement_in_place(v).expect("move in range");
    }
    (g, u)
}

fn validate<S: Scalar>(s: &AnnealSchedule<S>) -> Result<(), LcOptError> {
    let c = s.cooling_factor.as_f64();
    if !(c > 0.0 && c < 1.0) {
        return Err(LcOptError::Schedule("cooling factor must lie in (0, 1)"));
    }
    if s.w_edges < S::zero() || s.w_maxdeg < S::zero() || s.w_edges + s.w_maxdeg <= S::zero() {
        return Err(LcOptError::Schedule("weights must be non-negative with a positive sum"));
    }
    if let Some(t) = s.initial_temperature {
        if t.is_nan() || t <= S::zero() {
            return Err(LcOptError::Schedule("initial temperature must be positive"));
        }
    }
    Ok(())
}

/// One proposal; returns the LC vertices it applies (an involution as a whole).
fn propose(g: &Graph, set: MoveSet, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
    match set {
        MoveSet::SingleLc => {
            let movable: Vec<usize> = (0..g.n()).filter(|&v| g.degree(v) >= 2).collect();
            if movable.is_empty() {
                return None;
            }
            Some(vec![movable[rng.gen_range(0..movable.len())]])
        }
        MoveSet::Pivot => {
            let m = g.edge_count();
            if m == 0 {
                return None;
            }
            let (i, j) = g.edges().nth(rng.gen_range(0..m)).unwrap();
            Some(vec![i, j, i])
        }
    }
}

fn apply(g: &mut Graph, mv: &[usize]) {
    for &v in mv {
        g.local_complement_in_place(v).expect("move in range");
    }
}

fn undo(g: &mut Graph, mv: &[usize]) {
    for &v in mv.iter().rev() {
        g.local_complement_in_place(v).expect("move in range");
    }
}

/// Metropolis annealing over the LC orbit; returns the best graph visited.
pub fn anneal<S: Scalar>(g0: &Graph, s: &AnnealSchedule<S>) -> Result<AnnealResult<S>, LcOptError> {
    validate(s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let obj = |g: &Graph| objective(g, s.w_edges, s.w_maxdeg);
    let mut g = g0.clone();
    let start = obj(&g);
    let mut current = start;

    let mut temperature = match s.initial_temperature {
        Some(t) => t,
        None => {
            let mut deltas = Vec::with_capacity(100);
            for _ in 0..100 {
                let Some(mv) = propose(&g, s.move_set, &mut rng) else { break };
                apply(&mut g, &mv);
                deltas.push((obj(&g) - current).as_f64());
                undo(&mut g, &mv);
            }
            let n = deltas.len().max(1) as f64;
            let mean = deltas.iter().sum::<f64>() / n;
            let var = deltas.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n;
            S::of(var.sqrt().max(1e-3))
        }
    };

    let mut path: Vec<usize> = Vec::new();
    let mut best = AnnealResult {
        graph: g.clone(),
        moves: Vec::new(),
        objective: start,
        initial_objective: start,
    };
    for _ in 0..s.steps {
        let Some(mv) = propose(&g, s.move_set, &mut rng) else { break };
        apply(&mut g, &mv);
        let next = obj(&g);
        let delta = next - current;
        let accept = delta <= S::zero() || rng.gen::<f64>() < (-(delta / temperature)).as_f64().exp();
        if accept {
            current = next;
            path.extend_from_slice(&mv);
            if current < best.objective {
                best.objective = current;
                best.graph = g.clone();
                best.moves = path.clone();
            }
        } else {
            undo(&mut g, &mv);
        }
        temperature = temperature * s.cooling_factor;
    }
    Ok(best)
}

/// Independent chains seeded `seed, seed + 1, …`; the best by (objective, chain index) wins.
pub fn anneal_chains<S: Scalar>(
    g0: &Graph,
    s: &AnnealSchedule<S>,
    chains: usize,
) -> Result<AnnealResult<S>, LcOptError> {
    validate(s)?;
    let results: Vec<AnnealResult<S>> = (0..chains.max(1) as u64)
        .into_par_iter()
        .map(|c| {
            let mut sc = s.clone();
            sc.seed = s.seed.wrapping_add(c);
            anneal(g0, &sc)
        })
        .collect::<Result<_, _>>()?;
    Ok(results
        .into_iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.objective.partial_cmp(&b.objective).unwrap().then(ia.cmp(ib)))
        .map(|(_, r)| r)
        .unwrap())
}

/// Breadth-first closure under local complementation (labeled graphs).
pub fn lc_orbit_bfs(g0: &Graph, node_cap: usize) -> Result<Vec<Graph>, LcOptError> {
    let mut seen: HashSet<Graph> = HashSet::new();
    let mut order = vec![g0.clone()];
    seen.insert(g0.clone());
    let mut queue = VecDeque::from([g0.clone()]);
    while let Some(g) = queue.pop_front() {
        for v in 0..g.n() {
            if g.degree(v) < 2 {
                continue;
            }
            let h = g.local_complement(v).expect("in range");
            if seen.insert(h.clone()) {
                if seen.len() > node_cap {
                    return Err(LcOptError::OrbitCap { cap: node_cap, partial: order });
                }
                order.push(h.clone());
                queue.push_back(h);
            }
        }
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableau::StabilizerTableau;

    #[test]
    fn lc_unitary_realizes_local_complementation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(2..8);
            let mut g = Graph::new(n);
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen_bool(0.5) {
                        g.toggle_edge(i, j).unwrap();
                    }
                }
            }
            let v = rng.gen_range(0..n);
            let mut t = StabilizerTableau::graph_state(&g);
            t.apply_all(&lc_unitary(&g, v)).unwrap();
            let h = g.local_complement(v).unwrap();
            assert!(t.same_up_to_pauli(&StabilizerTableau::graph_state(&h)));
        }
    }

    #[test]
    fn lc_frame_tracks_sequences() {
        let g = Graph::cycle(6);
        let moves = [0, 3, 1, 0, 4];
        let (h, u) = lc_frame(&g, &moves);
        let mut t = StabilizerTableau::graph_state(&g);
        t.apply_frame(&u);
        assert!(t.same_up_to_pauli(&StabilizerTableau::graph_state(&h)));
    }

    #[test]
    fn complete_graph_anneals_to_star() {
        let s = AnnealSchedule::<f64> { steps: 200, seed: 5, ..Default::default() };
        let r = anneal(&Graph::complete(7), &s).unwrap();
        assert_eq!(r.graph.edge_count(), 6);
        assert_eq!(lc_frame(&Graph::complete(7), &r.moves).0, r.graph);
    }

    #[test]
    fn star_orbit_has_star_and_complete() {
        let orbit = lc_orbit_bfs(&Graph::star(5, 0), 1000).unwrap();
        assert!(orbit.contains(&Graph::complete(5)));
        let mut counts: Vec<usize> = orbit.iter().map(|g| g.edge_count()).collect();
        counts.sort_unstable();
        counts.dedup();
        assert_eq!(counts, vec![4, 10]);
        assert!(matches!(lc_orbit_bfs(&Graph::cycle(8), 3), Err(LcOptError::OrbitCap { .. })));
    }

    #[test]
    fn bad_schedules_rejected() {
        let s = AnnealSchedule::<f64> { cooling_factor: 1.5, ..Default::default() };
        assert!(anneal(&Graph::path(3), &s).is_err());
        let s = AnnealSchedule::<f64> { w_edges: 0.0, ..Default::default() };
        assert!(anneal(&Graph::path(3), &s).is_err());
    }
}
