use std::collections::HashSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::env::{for_each_allowed_action, score, Bipartite, EnvState};
use crate::graph::{Action, Graph};
use crate::scalar::Scalar;

use super::{stream, Candidate, Deadline, Method, SearchConfig, SearchError, SynthesisResult, TieBreaker};

/// One greedy decimation. `None` if the unmasked step cap `4·|E0|` is hit.
pub(crate) fn rollout<S: Scalar>(
    g0: &Graph,
    cfg: &SearchConfig<S>,
    bip: Option<&Bipartite>,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<Action>> {
    let mut st = EnvState::new(g0.clone());
    let cap = 4 * g0.edge_count();
    while !st.is_terminal() {
        if st.step_index() >= cap {
            return None;
        }
        let g = st.graph();
        let edges = g.edge_count();
        let mut best: Option<(S, usize)> = None;
        let mut chosen = None;
        let mut ties = 0u32;
        for_each_allowed_action(g, bip, |a, d| {
            if cfg.masked && d < 1 {
                return;
            }
            let s = score(d, edges, st.opens_layer(&a), &cfg.score_params);
            let key = match cfg.tie_breaker {
                TieBreaker::Random => 0,
                TieBreaker::MinDegree => g.degree(a.a()).max(g.degree(a.b())),
            };
            let better = match best {
                None => true,
                Some((bs, bk)) => s > bs || (s == bs && key < bk),
            };
            if better {
                best = Some((s, key));
                chosen = Some(a);
                ties = 1;
            } else if best == Some((s, key)) {
                ties += 1;
                if rng.gen_range(0..ties) == 0 {
                    chosen = Some(a);
                }
            }
        });
        st.step_unchecked(chosen?, 0);
    }
    Some(st.action_log().to_vec())
}

/// Shortest rollouts seen by a worker, plus every rollout length by iteration.
#[derive(Default)]
struct Pool {
    shortest: usize,
    logs: Vec<(usize, Vec<Action>)>,
    lengths: Vec<(usize, usize)>,
}

impl Pool {
    fn add(mut self, it: usize, log: Vec<Action>) -> Self {
        self.lengths.push((it, log.len()));
        if self.logs.is_empty() || log.len() < self.shortest {
            self.shortest = log.len();
            self.logs.clear();
        }
        if log.len() == self.shortest {
            self.logs.push((it, log));
        }
        self
    }

    fn merge(mut self, other: Pool) -> Pool {
        self.lengths.extend(other.lengths);
        if other.logs.is_empty() {
            return self;
        }
        if self.logs.is_empty() || other.shortest < self.shortest {
            self.shortest = other.shortest;
            self.logs = other.logs;
        } else if other.shortest == self.shortest {
            self.logs.extend(other.logs);
        }
        self
    }
}

/// Greedy best-first decimation with `cfg.iterations` randomized restarts.
/// The result depends only on the seed, not on the number of worker threads.
pub fn befs_run<S: Scalar>(g0: &Graph, cfg: &SearchConfig<S>) -> Result<SynthesisResult, SearchError> {
    if cfg.method != Method::Befs {
        return Err(SearchError::Config("method is not befs".into()));
    }
    cfg.validate(g0.n())?;
    let bip = if cfg.preserve_bipartite { Bipartite::of(g0) } else { None };
    let deadline = Deadline::new(cfg.time_budget);
    let found = std::sync::atomic::AtomicBool::new(false);

    let pool = (0..cfg.iterations)
        .into_par_iter()
        .fold(Pool::default, |pool, it| {
            if deadline.passed() || found.load(std::sync::atomic::Ordering::Relaxed) {
                return pool;
            }
            let mut rng = stream(cfg.seed, it as u64);
            match rollout(g0, cfg, bip.as_ref(), &mut rng) {
                Some(log) => {
                    if cfg.stop_at.is_some_and(|t| log.len() <= t) {
                        found.store(true, std::sync::atomic::Ordering::Relaxed);
                    }
                    pool.add(it, log)
                }
                None => pool,
            }
        })
        .reduce(Pool::default, Pool::merge);

    if pool.logs.is_empty() {
        return Err(SearchError::NoSolution);
    }
    let mut logs = pool.logs;
    logs.sort_by_key(|(it, _)| *it);
    let mut seen = HashSet::new();
    let mut best: Option<Candidate> = None;
    for (it, log) in logs {
        if !seen.insert(log.clone()) {
            continue;
        }
        let c = Candidate::build(g0, it, log)?;
        if best.as_ref().map_or(true, |b| c.key() < b.key()) {
            best = Some(c);
        }
    }

    let mut lengths = pool.lengths;
    lengths.sort_unstable();
    let mut improvements = Vec::new();
    for (it, len) in &lengths {
        if improvements.last().map_or(true, |&(_, l)| *len < l) {
            improvements.push((*it, *len));
        }
    }
    let mut r = best.expect("at least one log").into_result(g0, lengths.len());
    // Compilation may shave gates off the raw log length.
    if let Some(last) = improvements.last_mut() {
        last.1 = last.1.min(r.tq_gate_count);
    }
    r.improvements = improvements;
    Ok(r)
}
