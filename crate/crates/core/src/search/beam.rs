use std::cmp::Ordering;
use std::collections::HashSet;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use crate::env::{for_each_allowed_action, score, Bipartite, EnvState};
use crate::graph::{Action, Graph};
use crate::scalar::Scalar;

use super::{stream, Candidate, Deadline, Method, SearchConfig, SearchError, SynthesisResult};

/// Distinct terminal children compiled per expansion step.
const TERMINAL_CANDIDATES: usize = 16;

struct Node<S> {
    state: EnvState,
    score: S,
}

#[derive(Clone, Copy)]
struct Child<S> {
    parent: u32,
    action: Action,
    score: S,
    remaining: usize,
    order: (u64, u64),
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

thread_local! {
    static BUFFERS: std::cell::RefCell<(Vec<(Action, i64)>, Vec<(Action, i64)>)> =
        const { std::cell::RefCell::new((Vec::new(), Vec::new())) };
}

/// Sort key placing higher scores first, then the random tie-break.
fn order<S: Scalar>(score: S, key: u64) -> (u64, u64) {
    let bits = score.as_f64().to_bits();
    // Order-preserving map of the float onto u64, inverted for descending order.
    let asc = if bits >> 63 == 1 { !bits } else { bits | (1 << 63) };
    (!asc, key)
}

fn expand<S: Scalar>(
    node: &Node<S>,
    parent: u32,
    cfg: &SearchConfig<S>,
    bip: Option<&Bipartite>,
    n_a: usize,
    rng: &mut impl Rng,
) -> Vec<Child<S>> {
    let g = node.state.graph();
    let edges = g.edge_count();
    BUFFERS.with_borrow_mut(|(preferred, rest)| {
        preferred.clear();
        rest.clear();
        for_each_allowed_action(g, bip, |a, d| {
            if cfg.masked && d >= 1 {
                preferred.push((a, d));
            } else {
                rest.push((a, d));
            }
        });
        let mut picked: Vec<(Action, i64)> = Vec::with_capacity(n_a);
        if preferred.len() >= n_a {
            picked.extend(sample(rng, preferred.len(), n_a).into_iter().map(|i| preferred[i]));
        } else {
            picked.extend_from_slice(preferred);
            let k = (n_a - preferred.len()).min(rest.len());
            picked.extend(sample(rng, rest.len(), k).into_iter().map(|i| rest[i]));
        }
        picked
            .into_iter()
            .map(|(a, d)| {
                let score = node.score + score(d, edges, node.state.opens_layer(&a), &cfg.score_params);
                Child {
                    parent,
                    action: a,
                    score,
                    remaining: (edges as i64 - d) as usize,
                    order: order(score, rng.gen()),
                }
            })
            .collect()
    })
}

fn rank<S>(a: &Child<S>, b: &Child<S>) -> Ordering {
    a.order
        .cmp(&b.order)
        .then(a.parent.cmp(&b.parent))
        .then(a.action.cmp(&b.action))
}

/// Randomized beam search: `cfg.beam_width` states, each expanded by
/// `cfg.sampled_actions` sampled actions (edge-removing ones first when
/// masked), ranked by cumulative score. Every run stops at its first terminal
/// child and the search restarts with fresh samples, `cfg.iterations` times.
pub fn beam_run<S: Scalar>(g0: &Graph, cfg: &SearchConfig<S>) -> Result<SynthesisResult, SearchError> {
    if cfg.method != Method::Beam {
        return Err(SearchError::Config("method is not beam".into()));
    }
    cfg.validate(g0.n())?;
    let n_a = cfg.sampled_actions.resolve(g0.n()).max(1);
    let bytes = cfg
        .beam_width
        .saturating_mul(n_a)
        .saturating_mul(std::mem::size_of::<Child<S>>());
    if bytes > cfg.memory_limit_bytes {
        return Err(SearchError::Memory {
            beam_width: cfg.beam_width,
            sampled: n_a,
            bytes,
            limit: cfg.memory_limit_bytes,
        });
    }
    let bip = if cfg.preserve_bipartite { Bipartite::of(g0) } else { None };
    let deadline = Deadline::new(cfg.time_budget);
    let cap = 4 * g0.edge_count();

    let mut best: Option<Candidate> = None;
    let mut improvements = Vec::new();
    let mut iterations_used = 0;
    let mut expansion_steps = 0;
    let mut distinct_states = 0;

    if g0.is_edgeless() {
        let mut r = Candidate::build(g0, 0, Vec::new())?.into_result(g0, 1);
        r.improvements = vec![(0, 0)];
        return Ok(r);
    }

    'runs: for it in 0..cfg.iterations {
        if deadline.passed() || best.as_ref().is_some_and(|b| cfg.stop_at.is_some_and(|t| b.key().0 <= t)) {
            break;
        }
        iterations_used += 1;
        let mut beam = vec![Node { state: EnvState::new(g0.clone()), score: S::zero() }];
        for step in 0..cap {
            // A run that cannot finish at or below the incumbent is abandoned.
            if best.as_ref().is_some_and(|b| step + 1 > b.key().0) || deadline.passed() {
                continue 'runs;
            }
            let base = splitmix(splitmix(it as u64) ^ step as u64);
            let mut children: Vec<Child<S>> = beam
                .par_iter()
                .enumerate()
                .flat_map_iter(|(i, node)| {
                    let mut rng = stream(cfg.seed, splitmix(base ^ i as u64));
                    expand(node, i as u32, cfg, bip.as_ref(), n_a, &mut rng)
                })
                .collect();
            expansion_steps += 1;

            let terminal: Vec<Child<S>> = {
                let mut t: Vec<Child<S>> = children.iter().filter(|c| c.remaining == 0).copied().collect();
                t.sort_by(rank);
                t
            };
            if !terminal.is_empty() {
                let mut seen = HashSet::new();
                for c in terminal {
                    let mut log = beam[c.parent as usize].state.action_log().to_vec();
                    log.push(c.action);
                    if !seen.insert(log.clone()) {
                        continue;
                    }
                    let cand = Candidate::build(g0, it, log)?;
                    if best.as_ref().map_or(true, |b| cand.key() < b.key()) {
                        if best.as_ref().map_or(true, |b| cand.key().0 < b.key().0) {
                            improvements.push((it, cand.key().0));
                        }
                        best = Some(cand);
                    }
                    if seen.len() >= TERMINAL_CANDIDATES {
                        break;
                    }
                }
                continue 'runs;
            }

            // Rank in chunks just large enough to survive deduplication.
            let chunk = 2 * cfg.beam_width;
            let mut kept: HashSet<Graph> = HashSet::with_capacity(cfg.beam_width);
            let mut next = Vec::with_capacity(cfg.beam_width);
            let mut pending = &mut children[..];
            while next.len() < cfg.beam_width && !pending.is_empty() {
                let k = chunk.min(pending.len());
                if k < pending.len() {
                    pending.select_nth_unstable_by(k, rank);
                }
                let (head, tail) = pending.split_at_mut(k);
                head.sort_unstable_by(rank);
                for c in head.iter() {
                    if next.len() == cfg.beam_width {
                        break;
                    }
                    let parent = &beam[c.parent as usize].state;
                    let mut g = parent.graph().clone();
                    g.apply_action_unchecked(&c.action);
                    if kept.contains(&g) {
                        continue;
                    }
                    kept.insert(g);
                    let mut state = parent.clone();
                    state.step_unchecked(c.action, 0);
                    next.push(Node { state, score: c.score });
                }
                pending = tail;
            }
            distinct_states += next.len();
            beam = next;
        }
    }

    let best = best.ok_or(SearchError::NoSolution)?;
    let mut r = best.into_result(g0, iterations_used);
    r.improvements = improvements;
    r.expansion_steps = expansion_steps;
    r.distinct_states = distinct_states;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::SampledActions;
    use crate::tableau::StabilizerTableau;

    fn cfg(width: usize, sampled: SampledActions, iterations: usize) -> SearchConfig<f64> {
        SearchConfig {
            method: Method::Beam,
            beam_width: width,
            sampled_actions: sampled,
            iterations,
            ..Default::default()
        }
    }

    #[test]
    fn four_cycle_and_trivial_graphs() {
        let g = Graph::cycle(4);
        let r = beam_run(&g, &cfg(8, SampledActions::Fraction(1.0), 4)).unwrap();
        assert_eq!(r.tq_gate_count, 3);
        assert!(r.circuit.verify(&StabilizerTableau::graph_state(&g)).unwrap().is_exact());
        let r = beam_run(&Graph::new(4), &cfg(8, SampledActions::Count(3), 4)).unwrap();
        assert_eq!(r.tq_gate_count, 0);
    }

    #[test]
    fn deterministic_with_wider_exploration() {
        let g = Graph::cycle(10);
        let wide = cfg(16, SampledActions::Count(12), 3);
        let a = beam_run(&g, &wide).unwrap();
        assert_eq!(a, beam_run(&g, &wide).unwrap());
        let narrow = beam_run(&g, &cfg(1, SampledActions::Count(12), 3)).unwrap();
        let per_step = |r: &SynthesisResult| r.distinct_states as f64 / r.expansion_steps as f64;
        assert!(per_step(&narrow) <= 1.0);
        assert!(per_step(&a) > 4.0 * per_step(&narrow));
        assert!(a.improvements.windows(2).all(|w| w[1].1 < w[0].1));
    }

    #[test]
    fn memory_budget_is_enforced() {
        let c = SearchConfig { memory_limit_bytes: 1024, ..cfg(1000, SampledActions::Count(50), 1) };
        assert!(matches!(beam_run(&Graph::cycle(12), &c), Err(SearchError::Memory { .. })));
    }
}
