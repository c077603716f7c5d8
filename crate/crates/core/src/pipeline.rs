//! End-to-end synthesis: target tableau to verified preparation circuit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{css_cx_form, peephole, reconstruct, relayer, Circuit, CompileError};
use crate::graph::Graph;
use crate::lc_opt::{anneal_chains, lc_frame, AnnealSchedule, LcOptError};
use crate::mcts::{self_play, GuidanceProvider, HeuristicGuidance, MctsConfig, MctsError};
use crate::scalar::Scalar;
use crate::search::{self, SearchConfig, SearchError, SynthesisResult};
use crate::tableau::{StabilizerTableau, TableauError, Verdict};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine<S> {
    Befs(SearchConfig<S>),
    Beam(SearchConfig<S>),
    Mcts(MctsConfig<S>),
}

impl<S: Scalar> Engine<S> {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Befs(_) => "befs",
            Engine::Beam(_) => "beam",
            Engine::Mcts(_) => "mcts",
        }
    }
}

/// When to rewrite a bipartite result into CX-only two-qubit form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CssForm {
    /// Whenever the decimated graph is bipartite.
    Auto,
    Off,
    /// Fail unless the rewrite succeeds.
    Require,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LcOptConfig<S> {
    pub schedule: AnnealSchedule<S>,
    pub chains: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig<S> {
    pub engine: Engine<S>,
    /// Anneal the graph form first. An annealed graph with a lower objective
    /// is searched as well, and the better circuit by (count, depth) wins.
    pub lc_opt: Option<LcOptConfig<S>>,
    pub css_form: CssForm,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Tableau(#[from] TableauError),
    #[error(transparent)]
    LcOpt(#[from] LcOptError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Mcts(#[from] MctsError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("CX-only form requested but the decimated graph is not bipartite")]
    NotBipartite,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub circuit: Circuit,
    /// The search result on the graph actually decimated.
    pub search: SynthesisResult,
    /// Graph form of the target before annealing.
    pub initial_graph: Graph,
    /// The graph whose decimation produced the circuit.
    pub decimated_graph: Graph,
    pub annealed: bool,
    pub css_form: bool,
    pub verdict: Verdict,
}

/// Runs the full chain on `target` with heuristic MCTS guidance.
pub fn synthesize<S: Scalar>(
    target: &StabilizerTableau,
    cfg: &PipelineConfig<S>,
) -> Result<PipelineOutput, PipelineError> {
    let preserve = match &cfg.engine {
        Engine::Mcts(m) => m.preserve_bipartite,
        _ => true,
    };
    let mut gp = HeuristicGuidance { preserve_bipartite: preserve };
    synthesize_with(target, cfg, &mut gp)
}

/// [`synthesize`] with caller-supplied guidance for the MCTS engine.
pub fn synthesize_with<S: Scalar>(
    target: &StabilizerTableau,
    cfg: &PipelineConfig<S>,
    gp: &mut dyn GuidanceProvider<S>,
) -> Result<PipelineOutput, PipelineError> {
    let form = target.to_graph();
    let initial_graph = form.graph.clone();
    let mut candidates = vec![(form.graph, form.frame, false)];
    if let Some(lc) = &cfg.lc_opt {
        let r = anneal_chains(&initial_graph, &lc.schedule, lc.chains)?;
        if r.objective < r.initial_objective {
            let (h, u) = lc_frame(&initial_graph, &r.moves);
            debug_assert_eq!(h, r.graph);
            // target = F|G⟩ and |H⟩ = U|G⟩, so target = F U⁻¹ |H⟩.
            let frame = u.inverse().then(&candidates[0].1);
            candidates.push((h, frame, true));
        }
    }

    let mut best: Option<(Circuit, SynthesisResult, Graph, bool, bool)> = None;
    for (graph, frame, annealed) in candidates {
        let result = match &cfg.engine {
            Engine::Befs(c) => search::befs_run(&graph, c)?,
            Engine::Beam(c) => search::beam_run(&graph, c)?,
            Engine::Mcts(c) => self_play(&graph, c, gp)?.0,
        };
        let raw = reconstruct(&graph, &result.actions, Some(&frame), target)?;
        let mut circuit = relayer(&peephole(&raw));
        let mut css = false;
        if cfg.css_form != CssForm::Off {
            match graph.bipartition() {
                Some((_, b)) => {
                    let mut in_a = vec![false; graph.n()];
                    b.iter().for_each(|&q| in_a[q] = true);
                    match css_cx_form(&circuit, &in_a) {
                        Ok(c) => {
                            circuit = relayer(&c);
                            css = true;
                        }
                        Err(e) if cfg.css_form == CssForm::Require => return Err(e.into()),
                        Err(_) => {}
                    }
                }
                None if cfg.css_form == CssForm::Require => return Err(PipelineError::NotBipartite),
                None => {}
            }
        }
        let key = (circuit.tq_count(), circuit.tq_depth());
        if best.as_ref().map_or(true, |b| key < (b.0.tq_count(), b.0.tq_depth())) {
            best = Some((circuit, result, graph, annealed, css));
        }
    }
    let (circuit, result, graph, annealed, css) = best.expect("at least the original graph");
    let verdict = circuit.verify(target)?;
    Ok(PipelineOutput {
        circuit,
        search: result,
        initial_graph,
        decimated_graph: graph,
        annealed,
        css_form: css,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::builtin;
    use crate::lc_opt::MoveSet;

    fn befs(iterations: usize) -> Engine<f64> {
        Engine::Befs(SearchConfig { iterations, ..Default::default() })
    }

    #[test]
    fn surface_code_end_to_end() {
        let target = builtin("surface_9").unwrap().target_tableau().unwrap();
        let cfg = PipelineConfig { engine: befs(200), lc_opt: None, css_form: CssForm::Require };
        let out = synthesize(&target, &cfg).unwrap();
        assert!(out.verdict.is_exact());
        assert!(out.css_form);
        assert_eq!(out.circuit.tq_count(), out.search.tq_gate_count);
        assert!(out.circuit.gates().iter().filter(|g| g.is_two_qubit()).all(|g| g.name() == "CX"));
        assert!(out.circuit.layers().is_some());
    }

    #[test]
    fn annealed_graph_keeps_the_target() {
        let target = builtin("color_19").unwrap().target_tableau().unwrap();
        let schedule = AnnealSchedule { steps: 3000, move_set: MoveSet::Pivot, ..Default::default() };
        let cfg = PipelineConfig {
            engine: befs(50),
            lc_opt: Some(LcOptConfig { schedule, chains: 2 }),
            css_form: CssForm::Auto,
        };
        let out = synthesize(&target, &cfg).unwrap();
        assert!(out.annealed);
        assert!(out.decimated_graph.edge_count() < out.initial_graph.edge_count());
        assert!(out.decimated_graph.bipartition().is_some());
        assert!(out.verdict.is_exact());
    }

    #[test]
    fn mcts_engine_verifies() {
        let target = builtin("carbon_12").unwrap().target_tableau().unwrap();
        let engine = Engine::Mcts(MctsConfig::<f64> { simulations: 64, ..Default::default() });
        let cfg = PipelineConfig { engine, lc_opt: None, css_form: CssForm::Auto };
        assert!(synthesize(&target, &cfg).unwrap().verdict.is_exact());
    }
}
