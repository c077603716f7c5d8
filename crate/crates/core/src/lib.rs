//! Preparation circuits for stabilizer states by graph decimation.
//!
//! A target state is brought into graph form (graph state plus per-qubit
//! Cliffords), the graph is decimated to the empty graph with CZ, CX and CY
//! actions chosen by a search engine, and the inverted action sequence is
//! compiled, optimized and verified against the target tableau.
//!
//! The real-valued parts (scores, values, temperatures) are generic over
//! [`scalar::Scalar`]; the aliases below fix them to `f64`.

pub(crate) mod bits;
pub mod circuit;
pub mod codes;
pub mod env;
pub mod gate;
pub mod graph;
pub mod lc_opt;
pub mod mcts;
pub mod pipeline;
pub mod scalar;
pub mod search;
pub mod tableau;

pub type ScoreParamsF64 = env::ScoreParams<f64>;
pub type SearchConfigF64 = search::SearchConfig<f64>;
pub type MctsConfigF64 = mcts::MctsConfig<f64>;
pub type AnnealScheduleF64 = lc_opt::AnnealSchedule<f64>;
pub type PipelineConfigF64 = pipeline::PipelineConfig<f64>;
pub type EngineF64 = pipeline::Engine<f64>;
