use graphsynth::pipeline::{PipelineConfig, PipelineOutput};
use serde::Serialize;

/// Synthesis report. Field order is the serialization order and stays stable.
#[derive(Serialize)]
pub struct RunReport<'a> {
    pub code: &'a str,
    pub n: usize,
    pub method: &'static str,
    pub config: &'a PipelineConfig<f64>,
    pub initial_edges: usize,
    pub decimated_edges: usize,
    pub lc_opt_applied: bool,
    pub tq_gate_count: usize,
    pub tq_depth: usize,
    pub gate_count: usize,
    pub css_cx_form: bool,
    pub verdict: &'static str,
    pub iterations: usize,
    pub best_found_at: usize,
    pub edge_profile: &'a [usize],
    pub improvements: &'a [(usize, usize)],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl<'a> RunReport<'a> {
    pub fn new(code: &'a str, cfg: &'a PipelineConfig<f64>, out: &'a PipelineOutput, wall: Option<f64>) -> Self {
        RunReport {
            code,
            n: out.circuit.n(),
            method: cfg.engine.name(),
            config: cfg,
            initial_edges: out.initial_graph.edge_count(),
            decimated_edges: out.decimated_graph.edge_count(),
            lc_opt_applied: out.annealed,
            tq_gate_count: out.circuit.tq_count(),
            tq_depth: out.circuit.tq_depth(),
            gate_count: out.circuit.len(),
            css_cx_form: out.css_form,
            verdict: out.verdict.name(),
            iterations: out.search.iterations_used,
            best_found_at: out.search.best_found_at,
            edge_profile: &out.search.trajectory_edge_profile,
            improvements: &out.search.improvements,
            wall_time_s: wall,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
