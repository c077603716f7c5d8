//! Heuristic synthesis engines: greedy best-first rollouts with restarts and
//! randomized beam search.

mod beam;
mod befs;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{peephole, reconstruct, relayer, Circuit, CompileError};
use crate::env::{action_count, EnvError, ScoreParams};
use crate::graph::{Action, Graph};
use crate::scalar::Scalar;
use crate::tableau::StabilizerTableau;

pub use beam::beam_run;
pub use befs::befs_run;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Befs,
    Beam,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreaker {
    Random,
    /// Prefer the action whose busier endpoint has the lowest degree.
    MinDegree,
}

/// Actions sampled per beam state, as a count or as a fraction of all actions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampledActions {
    Count(usize),
    Fraction(f64),
}

impl SampledActions {
    pub fn resolve(&self, n: usize) -> usize {
        let total = action_count(n);
        match *self {
            SampledActions::Count(k) => k.min(total),
            SampledActions::Fraction(f) => ((f * total as f64).round() as usize).clamp(1, total.max(1)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig<S> {
    pub method: Method,
    /// BeFS restarts, or complete beam runs.
    pub iterations: usize,
    pub beam_width: usize,
    pub sampled_actions: SampledActions,
    pub tie_breaker: TieBreaker,
    pub score_params: ScoreParams<S>,
    pub seed: u64,
    pub masked: bool,
    /// Wall-clock budget in seconds. Results under a budget depend on timing.
    pub time_budget: Option<f64>,
    /// On bipartite inputs, keep the bipartition by allowing only CZ across
    /// and CX within the parts.
    pub preserve_bipartite: bool,
    /// Stop as soon as a solution with at most this many two-qubit gates is found.
    pub stop_at: Option<usize>,
    /// Upper bound on the beam's child buffer.
    pub memory_limit_bytes: usize,
}

impl<S: Scalar> Default for SearchConfig<S> {
    fn default() -> Self {
        SearchConfig {
            method: Method::Befs,
            iterations: 1000,
            beam_width: 1000,
            sampled_actions: SampledActions::Fraction(0.05),
            tie_breaker: TieBreaker::Random,
            score_params: ScoreParams::default(),
            seed: 0,
            masked: true,
            time_budget: None,
            preserve_bipartite: true,
            stop_at: None,
            memory_limit_bytes: 1 << 31,
        }
    }
}

impl<S: Scalar> SearchConfig<S> {
    pub fn validate(&self, n: usize) -> Result<(), SearchError> {
        self.score_params.validate()?;
        if self.iterations == 0 {
            return Err(SearchError::Config("iterations must be at least 1".into()));
        }
        if self.beam_width == 0 {
            return Err(SearchError::Config("beam width must be at least 1".into()));
        }
        match self.sampled_actions {
            SampledActions::Count(0) => {
                return Err(SearchError::Config("sampled actions must be at least 1".into()))
            }
            SampledActions::Fraction(f) if !(f > 0.0 && f <= 1.0) => {
                return Err(SearchError::Config(format!("sampled fraction {f} outside (0, 1]")))
            }
            SampledActions::Count(k) if n >= 2 && k > action_count(n) => {
                return Err(SearchError::Config(format!(
                    "{k} sampled actions exceed the {} available",
                    action_count(n)
                )))
            }
            _ => {}
        }
        if let Some(t) = self.time_budget {
            if t.is_nan() || t <= 0.0 {
                return Err(SearchError::Config("time budget must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("beam buffer of {beam_width} x {sampled} children needs {bytes} bytes, limit {limit}")]
    Memory { beam_width: usize, sampled: usize, bytes: usize, limit: usize },
    #[error("no rollout terminated within the step cap")]
    NoSolution,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthesisResult {
    /// Prepares the input graph state from `|0…0⟩`.
    pub circuit: Circuit,
    pub actions: Vec<Action>,
    pub tq_gate_count: usize,
    pub tq_depth: usize,
    pub iterations_used: usize,
    pub best_found_at: usize,
    /// Edge count before each step and after the last one.
    pub trajectory_edge_profile: Vec<usize>,
    /// `(iteration, tq_gate_count)` each time the incumbent improved.
    pub improvements: Vec<(usize, usize)>,
    /// Beam only: total expansion steps across all runs.
    pub expansion_steps: usize,
    /// Beam only: distinct states kept, summed over expansion steps.
    pub distinct_states: usize,
}

/// Compiles a decimation log of `g` into its optimized preparation circuit.
pub fn compile_log(g: &Graph, log: &[Action]) -> Result<Circuit, CompileError> {
    let target = StabilizerTableau::graph_state(g);
    let c = reconstruct(g, log, None, &target)?;
    Ok(relayer(&peephole(&c)))
}

pub fn edge_profile(g: &Graph, log: &[Action]) -> Vec<usize> {
    let mut g = g.clone();
    let mut out = vec![g.edge_count()];
    for a in log {
        g.apply_action_in_place(a).expect("log fits the graph");
        out.push(g.edge_count());
    }
    out
}

/// Random stream for a unit of work identified by `key` under `seed`.
pub fn stream(seed: u64, key: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(key);
    rng
}

pub(crate) struct Deadline(Option<(Instant, f64)>);

impl Deadline {
    pub(crate) fn new(budget: Option<f64>) -> Self {
        Deadline(budget.map(|b| (Instant::now(), b)))
    }

    pub(crate) fn passed(&self) -> bool {
        self.0.is_some_and(|(t, b)| t.elapsed().as_secs_f64() >= b)
    }
}

/// Candidate solution ordered by (two-qubit count, depth, iteration).
pub(crate) struct Candidate {
    pub iteration: usize,
    pub log: Vec<Action>,
    pub circuit: Circuit,
}

impl Candidate {
    pub(crate) fn build(g: &Graph, iteration: usize, log: Vec<Action>) -> Result<Self, CompileError> {
        let circuit = compile_log(g, &log)?;
        Ok(Candidate { iteration, log, circuit })
    }

    pub(crate) fn key(&self) -> (usize, usize, usize) {
        (self.circuit.tq_count(), self.circuit.tq_depth(), self.iteration)
    }

    pub(crate) fn into_result(self, g: &Graph, iterations_used: usize) -> SynthesisResult {
        SynthesisResult {
            tq_gate_count: self.circuit.tq_count(),
            tq_depth: self.circuit.tq_depth(),
            trajectory_edge_profile: edge_profile(g, &self.log),
            circuit: self.circuit,
            actions: self.log,
            iterations_used,
            best_found_at: self.iteration,
            improvements: Vec::new(),
            expansion_steps: 0,
            distinct_states: 0,
        }
    }
}

/// Runs the configured method.
pub fn run<S: Scalar>(g: &Graph, cfg: &SearchConfig<S>) -> Result<SynthesisResult, SearchError> {
    match cfg.method {
        Method::Befs => befs_run(g, cfg),
        Method::Beam => beam_run(g, cfg),
    }
}
