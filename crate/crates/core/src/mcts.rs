//! Monte Carlo tree search over decimation states with batched expansion and
//! pluggable priors and values.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::CompileError;
use crate::env::{action_count, action_index, for_each_allowed_action, Bipartite, EnvState};
use crate::graph::{Action, Graph};
use crate::scalar::Scalar;
use crate::search::{stream, Candidate, SynthesisResult};

/// Priors and values for the search. Values estimate the number of actions
/// still needed to reach the empty graph, so lower is better.
pub trait GuidanceProvider<S: Scalar> {
    fn value(&mut self, state: &EnvState) -> S;

    /// Unnormalized non-negative weights over `actions`.
    fn policy(&mut self, state: &EnvState, actions: &[Action]) -> Vec<S>;

    /// Batch form of [`GuidanceProvider::value`]; remote providers override it.
    fn values(&mut self, states: &[&EnvState]) -> Vec<S> {
        states.iter().map(|s| self.value(s)).collect()
    }
}

/// Edge-removal heuristic: the policy weighs actions by the edges they remove,
/// and the value divides the edge count by the mean removal of the removing
/// actions, both read off the sum of edges removed by all actions.
#[derive(Clone, Copy, Debug, Default)]
pub struct HeuristicGuidance {
    pub preserve_bipartite: bool,
}

impl<S: Scalar> GuidanceProvider<S> for HeuristicGuidance {
    fn value(&mut self, state: &EnvState) -> S {
        let g = state.graph();
        if g.is_edgeless() {
            return S::zero();
        }
        let bip = if self.preserve_bipartite { Bipartite::of(state.initial()) } else { None };
        let (mut removed, mut removing) = (0i64, 0i64);
        for_each_allowed_action(g, bip.as_ref(), |_, d| {
            if d > 0 {
                removed += d;
                removing += 1;
            }
        });
        let edges = S::of_i64(g.edge_count() as i64);
        if removed == 0 {
            return edges;
        }
        edges * S::of_i64(removing) / S::of_i64(removed)
    }

    fn policy(&mut self, state: &EnvState, actions: &[Action]) -> Vec<S> {
        let g = state.graph();
        let w: Vec<S> = actions
            .iter()
            .map(|a| S::of_i64(g.edge_delta(a).unwrap_or(0).max(0)))
            .collect();
        if w.iter().all(|x| *x == S::zero()) {
            return vec![S::one(); actions.len()];
        }
        w
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MctsConfig<S> {
    /// Node evaluations per move.
    pub simulations: usize,
    /// Leaves selected per batch.
    pub k: usize,
    /// Actions expanded per selected leaf.
    pub m: usize,
    pub c: S,
    /// Depth below the root beyond which nodes are not expanded.
    pub max_depth: usize,
    pub masked: bool,
    pub preserve_bipartite: bool,
    pub seed: u64,
}

impl<S: Scalar> Default for MctsConfig<S> {
    fn default() -> Self {
        MctsConfig {
            simulations: 512,
            k: 8,
            m: 16,
            c: S::one(),
            max_depth: 8,
            masked: true,
            preserve_bipartite: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MctsError {
    #[error("invalid MCTS configuration: {0}")]
    Config(&'static str),
    #[error("root state is terminal")]
    Terminal,
    #[error("no action available from a non-terminal state")]
    Stuck,
    #[error("self-play exceeded {0} steps")]
    StepCap(usize),
    #[error(transparent)]
    Compile(#[from] CompileError),
}

impl<S: Scalar> MctsConfig<S> {
    pub fn validate(&self) -> Result<(), MctsError> {
        if self.simulations == 0 {
            return Err(MctsError::Config("simulation budget must be at least 1"));
        }
        if self.k == 0 || self.m == 0 {
            return Err(MctsError::Config("k and m must be at least 1"));
        }
        if self.max_depth == 0 {
            return Err(MctsError::Config("max depth must be at least 1"));
        }
        if self.c.is_nan() || self.c < S::zero() {
            return Err(MctsError::Config("exploration constant must be non-negative"));
        }
        Ok(())
    }
}

/// `Q̄(s') + c · P(s,a) · N(s) / (1 + N(s'))`.
pub fn uct_score<S: Scalar>(q: S, prior: S, parent_visits: u32, child_visits: u32, c: S) -> S {
    q + c * prior * S::of_i64(parent_visits as i64) / S::of_i64(1 + child_visits as i64)
}

#[derive(Clone, Debug)]
pub struct TreeNode<S> {
    pub state_key: u64,
    pub state: EnvState,
    pub parent: Option<usize>,
    pub action: Option<Action>,
    pub prior: S,
    pub visits: u32,
    /// Sum of backed-up scores; a score is minus the estimated total actions
    /// from the root through this node.
    pub quality_sum: S,
    pub children: Vec<usize>,
    pub expanded: bool,
    pub depth: usize,
}

/// Arena of nodes plus the score range used to normalize `Q̄` into `[0, 1]`.
#[derive(Clone, Debug)]
pub struct Tree<S> {
    pub nodes: Vec<TreeNode<S>>,
    lo: Option<S>,
    hi: Option<S>,
}

fn state_key(g: &Graph) -> u64 {
    let mut h = DefaultHasher::new();
    g.hash(&mut h);
    h.finish()
}

impl<S: Scalar> Tree<S> {
    fn new(root: &EnvState) -> Self {
        Tree {
            nodes: vec![TreeNode {
                state_key: state_key(root.graph()),
                state: root.clone(),
                parent: None,
                action: None,
                prior: S::one(),
                visits: 0,
                quality_sum: S::zero(),
                children: Vec::new(),
                expanded: false,
                depth: 0,
            }],
            lo: None,
            hi: None,
        }
    }

    /// Min-max normalized mean score; 0 for unvisited nodes or a flat range.
    pub fn q(&self, i: usize) -> S {
        let n = &self.nodes[i];
        match (self.lo, self.hi) {
            (Some(lo), Some(hi)) if hi > lo && n.visits > 0 => {
                (n.quality_sum / S::of_i64(n.visits as i64) - lo) / (hi - lo)
            }
            _ => S::zero(),
        }
    }

    fn backup(&mut self, mut i: usize, score: S) {
        self.lo = Some(self.lo.map_or(score, |l| l.min(score)));
        self.hi = Some(self.hi.map_or(score, |h| h.max(score)));
        loop {
            let n = &mut self.nodes[i];
            n.visits += 1;
            n.quality_sum = n.quality_sum + score;
            match n.parent {
                Some(p) => i = p,
                None => break,
            }
        }
    }

    fn select(&self, c: S, max_depth: usize, virtual_visits: &[u32]) -> Vec<usize> {
        let mut path = vec![0];
        let mut i = 0;
        loop {
            let n = &self.nodes[i];
            if !n.expanded || n.children.is_empty() || n.depth >= max_depth {
                return path;
            }
            let parent_visits = n.visits + virtual_visits[i];
            let mut best = (S::neg_infinity(), usize::MAX);
            for &ch in &n.children {
                let u = uct_score(self.q(ch), self.nodes[ch].prior, parent_visits, self.nodes[ch].visits + virtual_visits[ch], c);
                if u > best.0 {
                    best = (u, ch);
                }
            }
            i = best.1;
            path.push(i);
        }
    }

    fn is_leaf_blocked(&self, i: usize, max_depth: usize) -> bool {
        let n = &self.nodes[i];
        n.state.is_terminal() || n.depth >= max_depth || (n.expanded && n.children.is_empty())
    }
}

/// Root decision: the most visited action and the visit distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchedMove<S> {
    pub action: Action,
    pub visits: Vec<(Action, u32)>,
    pub distribution: Vec<(Action, S)>,
}

fn legal_actions(state: &EnvState, bip: Option<&Bipartite>, masked: bool) -> Vec<Action> {
    let mut out = Vec::new();
    for_each_allowed_action(state.graph(), bip, |a, d| {
        if !masked || d >= 1 {
            out.push(a);
        }
    });
    out
}

/// Weighted sampling of `m` indices without replacement (exponential keys);
/// zero weights are drawn last.
fn weighted_sample<S: Scalar>(weights: &[S], m: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let w = w.as_f64();
            (if w > 0.0 { u.ln() / w } else { f64::NEG_INFINITY }, i)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    keyed.truncate(m);
    keyed.into_iter().map(|(_, i)| i).collect()
}

/// Builds a fresh tree at `root` and returns the most visited root action.
pub fn search_move<S: Scalar>(
    root: &EnvState,
    cfg: &MctsConfig<S>,
    gp: &mut dyn GuidanceProvider<S>,
    rng: &mut ChaCha8Rng,
) -> Result<SearchedMove<S>, MctsError> {
    Ok(search_tree(root, cfg, gp, rng)?.1)
}

pub(crate) fn search_tree<S: Scalar>(
    root: &EnvState,
    cfg: &MctsConfig<S>,
    gp: &mut dyn GuidanceProvider<S>,
    rng: &mut ChaCha8Rng,
) -> Result<(Tree<S>, SearchedMove<S>), MctsError> {
    cfg.validate()?;
    if root.is_terminal() {
        return Err(MctsError::Terminal);
    }
    let bip = if cfg.preserve_bipartite { Bipartite::of(root.initial()) } else { None };
    let mut tree = Tree::new(root);
    let mut virtual_visits: Vec<u32> = vec![0];
    let mut sims = 0;

    while sims < cfg.simulations {
        virtual_visits.iter_mut().for_each(|v| *v = 0);
        let mut leaves: Vec<usize> = Vec::with_capacity(cfg.k);
        for _ in 0..cfg.k {
            let path = tree.select(cfg.c, cfg.max_depth, &virtual_visits);
            let leaf = *path.last().unwrap();
            if leaves.contains(&leaf) {
                break;
            }
            for &p in &path {
                virtual_visits[p] += 1;
            }
            leaves.push(leaf);
        }

        let mut batch: Vec<(usize, Action, S, EnvState)> = Vec::new();
        let mut progressed = false;
        for &leaf in &leaves {
            if sims + batch.len() >= cfg.simulations {
                break;
            }
            if tree.is_leaf_blocked(leaf, cfg.max_depth) {
                // Nothing to expand: re-back-up the node's own mean.
                let n = &tree.nodes[leaf];
                let score = if n.visits > 0 {
                    n.quality_sum / S::of_i64(n.visits as i64)
                } else {
                    -S::of_i64(n.depth as i64)
                };
                tree.backup(leaf, score);
                sims += 1;
                progressed = true;
                continue;
            }
            tree.nodes[leaf].expanded = true;
            let state = &tree.nodes[leaf].state;
            let actions = legal_actions(state, bip.as_ref(), cfg.masked);
            if actions.is_empty() {
                continue;
            }
            let weights = gp.policy(state, &actions);
            let room = cfg.simulations - sims - batch.len();
            let picked = weighted_sample(&weights, cfg.m.min(room), rng);
            let total = picked.iter().fold(S::zero(), |s, &i| s + weights[i].max(S::zero()));
            for &i in &picked {
                let prior = if total > S::zero() {
                    weights[i].max(S::zero()) / total
                } else {
                    S::one() / S::of_i64(picked.len() as i64)
                };
                let mut child = state.clone();
                child.step_unchecked(actions[i], 0);
                batch.push((leaf, actions[i], prior, child));
            }
        }

        if !batch.is_empty() {
            let values = {
                let states: Vec<&EnvState> = batch.iter().map(|b| &b.3).collect();
                gp.values(&states)
            };
            for ((parent, action, prior, state), v) in batch.into_iter().zip(values) {
                let depth = tree.nodes[parent].depth + 1;
                let remaining = if state.is_terminal() { S::zero() } else { v };
                let idx = tree.nodes.len();
                tree.nodes.push(TreeNode {
                    state_key: state_key(state.graph()),
                    state,
                    parent: Some(parent),
                    action: Some(action),
                    prior,
                    visits: 0,
                    quality_sum: S::zero(),
                    children: Vec::new(),
                    expanded: false,
                    depth,
                });
                virtual_visits.push(0);
                tree.nodes[parent].children.push(idx);
                tree.backup(idx, -(S::of_i64(depth as i64) + remaining));
                sims += 1;
            }
            progressed = true;
        }
        if !progressed {
            break;
        }
    }

    let root_children = &tree.nodes[0].children;
    if root_children.is_empty() {
        return Err(MctsError::Stuck);
    }
    let best = *root_children
        .iter()
        .max_by(|&&a, &&b| {
            let (na, nb) = (&tree.nodes[a], &tree.nodes[b]);
            na.visits
                .cmp(&nb.visits)
                .then(tree.q(a).partial_cmp(&tree.q(b)).unwrap_or(std::cmp::Ordering::Equal))
                .then(nb.action.cmp(&na.action))
        })
        .unwrap();
    let total: u32 = root_children.iter().map(|&c| tree.nodes[c].visits).sum();
    let visits: Vec<(Action, u32)> = root_children
        .iter()
        .map(|&c| (tree.nodes[c].action.unwrap(), tree.nodes[c].visits))
        .collect();
    let distribution = visits
        .iter()
        .map(|&(a, v)| (a, S::of_i64(v as i64) / S::of_i64(total.max(1) as i64)))
        .collect();
    let action = tree.nodes[best].action.unwrap();
    Ok((tree, SearchedMove { action, visits, distribution }))
}

/// One training triple: the state, the root visit distribution in
/// [`crate::env::for_each_action`] order, and the actions that followed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord<S> {
    pub observation: Vec<bool>,
    pub policy: Vec<S>,
    pub remaining: usize,
}

/// Plays `search_move` to the empty graph and compiles the move sequence.
pub fn self_play<S: Scalar>(
    g0: &Graph,
    cfg: &MctsConfig<S>,
    gp: &mut dyn GuidanceProvider<S>,
) -> Result<(SynthesisResult, Vec<TrajectoryRecord<S>>), MctsError> {
    cfg.validate()?;
    let n = g0.n();
    let cap = 4 * g0.edge_count();
    let mut state = EnvState::new(g0.clone());
    let mut records = Vec::new();
    while !state.is_terminal() {
        if state.step_index() >= cap {
            return Err(MctsError::StepCap(cap));
        }
        let mut rng = stream(cfg.seed, state.step_index() as u64);
        let mv = search_move(&state, cfg, gp, &mut rng)?;
        let mut policy = vec![S::zero(); action_count(n)];
        for (a, p) in &mv.distribution {
            policy[action_index(n, a)] = *p;
        }
        records.push(TrajectoryRecord { observation: state.observe(), policy, remaining: 0 });
        state.step_unchecked(mv.action, 0);
    }
    let total = records.len();
    for (i, r) in records.iter_mut().enumerate() {
        r.remaining = total - i;
    }
    let result = Candidate::build(g0, 0, state.action_log().to_vec())?.into_result(g0, 1);
    Ok((result, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableau::StabilizerTableau;
    use rand::SeedableRng;

    fn heuristic() -> HeuristicGuidance {
        HeuristicGuidance { preserve_bipartite: true }
    }

    #[test]
    fn uct_formula() {
        assert_eq!(uct_score(0.25f64, 0.5, 10, 3, 0.0), 0.25);
        assert_eq!(uct_score(0.0f64, 0.5, 10, 0, 1.0), 5.0);
        assert!(uct_score(0.3f64, 0.2, 10, 4, 1.0) < uct_score(0.3f64, 0.2, 10, 2, 1.0));
    }

    #[test]
    fn four_cycle_picks_a_double_removal() {
        let root = EnvState::new(Graph::cycle(4));
        let cfg = MctsConfig::<f64> { simulations: 64, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mv = search_move(&root, &cfg, &mut heuristic(), &mut rng).unwrap();
        assert_eq!(root.graph().edge_delta(&mv.action).unwrap(), 2);
        let allowed = [Action::cx(0, 2), Action::cx(2, 0), Action::cx(1, 3), Action::cx(3, 1)];
        assert!(allowed.contains(&mv.action));
    }

    #[test]
    fn single_edge_and_errors() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let cfg = MctsConfig::<f64>::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mv = search_move(&EnvState::new(g), &cfg, &mut heuristic(), &mut rng).unwrap();
        assert_eq!(mv.action, Action::cz(0, 1));
        let err = search_move(&EnvState::new(Graph::new(3)), &cfg, &mut heuristic(), &mut rng);
        assert_eq!(err.unwrap_err(), MctsError::Terminal);
        let zero = MctsConfig::<f64> { simulations: 0, ..Default::default() };
        assert!(matches!(
            search_move(&EnvState::new(Graph::cycle(4)), &zero, &mut heuristic(), &mut rng),
            Err(MctsError::Config(_))
        ));
    }

    #[test]
    fn wide_exploration_visits_each_root_child_once() {
        let root = EnvState::new(Graph::complete(5));
        let n_children = legal_actions(&root, None, true).len().min(16);
        let cfg = MctsConfig::<f64> { simulations: n_children, c: 1e9, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (tree, _) = search_tree(&root, &cfg, &mut Uniform, &mut rng).unwrap();
        assert_eq!(tree.nodes[0].children.len(), n_children);
        assert!(tree.nodes[0].children.iter().all(|&c| tree.nodes[c].visits == 1));
    }

    struct Uniform;
    impl GuidanceProvider<f64> for Uniform {
        fn value(&mut self, state: &EnvState) -> f64 {
            state.graph().edge_count() as f64
        }
        fn policy(&mut self, _: &EnvState, actions: &[Action]) -> Vec<f64> {
            vec![1.0; actions.len()]
        }
    }

    struct Shifted(f64);
    impl GuidanceProvider<f64> for Shifted {
        fn value(&mut self, state: &EnvState) -> f64 {
            state.graph().edge_count() as f64 + self.0
        }
        fn policy(&mut self, state: &EnvState, actions: &[Action]) -> Vec<f64> {
            heuristic().policy(state, actions)
        }
    }

    #[test]
    fn visit_argmax_ignores_value_offsets() {
        for seed in 0..5 {
            let root = EnvState::new(Graph::cycle(7));
            let cfg = MctsConfig::<f64> { simulations: 200, seed, ..Default::default() };
            let a = search_move(&root, &cfg, &mut Shifted(0.0), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let b = search_move(&root, &cfg, &mut Shifted(64.0), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(a.action, b.action);
            assert_eq!(a.visits, b.visits);
        }
    }

    #[test]
    fn tree_invariants_hold() {
        let root = EnvState::new(Graph::cycle(8));
        let cfg = MctsConfig::<f64> { simulations: 300, ..Default::default() };
        let (tree, _) = search_tree(&root, &cfg, &mut heuristic(), &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        for (i, n) in tree.nodes.iter().enumerate() {
            // Each visit is a back-up through the node: its own evaluation,
            // a re-back-up, or one passing through a child.
            let through: u32 = n.children.iter().map(|&c| tree.nodes[c].visits).sum();
            assert!(n.visits >= through);
            assert!(n.quality_sum.is_finite());
            if !n.children.is_empty() {
                let p: f64 = n.children.iter().map(|&c| tree.nodes[c].prior).sum();
                assert!((p - 1.0).abs() < 1e-9, "node {i} priors sum {p}");
            }
        }
    }

    #[test]
    fn self_play_records_and_verifies() {
        let g = Graph::cycle(6);
        let cfg = MctsConfig::<f64> { simulations: 64, ..Default::default() };
        let (r, recs) = self_play(&g, &cfg, &mut heuristic()).unwrap();
        assert!(r.circuit.verify(&StabilizerTableau::graph_state(&g)).unwrap().is_exact());
        assert_eq!(recs.len(), r.actions.len());
        for (i, rec) in recs.iter().enumerate() {
            assert_eq!(rec.remaining, recs.len() - i);
            assert!((rec.policy.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert_eq!(rec.policy.len(), action_count(6));
        }
        let (r, recs) = self_play(&Graph::new(4), &cfg, &mut heuristic()).unwrap();
        assert!(recs.is_empty() && r.tq_gate_count == 0);
    }
}
