use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use graphsynth::circuit::Circuit;
use graphsynth::codes::{builtin, load_code_str, CodeFormat, CodeSpec};
use graphsynth::env::ScoreParams;
use graphsynth::graph::Graph;
use graphsynth::lc_opt::{anneal_chains, lc_orbit_bfs, AnnealSchedule, LcOptError, MoveSet};
use graphsynth::mcts::MctsConfig;
use graphsynth::pipeline::{synthesize, CssForm, Engine, LcOptConfig, PipelineConfig};
use graphsynth::search::{SampledActions, SearchConfig, TieBreaker};
use graphsynth::tableau::{StabilizerTableau, Verdict};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

mod report;

use report::RunReport;

#[derive(Parser)]
#[command(name = "graphsynth", version, about = "Stabilizer state preparation by graph decimation")]
struct Cli {
    /// Worker threads for restarts and annealing chains (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize, optimize and verify a preparation circuit.
    Synth(SynthArgs),
    /// Print the graph form of a code, or re-save it in a code format.
    Convert(ConvertArgs),
    /// Anneal a graph over its local-complementation orbit.
    LcOpt(LcOptArgs),
    /// Check a circuit file against a code's target state.
    Verify(VerifyArgs),
    /// Serve the environment bridge on stdio or a Unix socket.
    ServeBridge(ServeArgs),
    /// Enumerate the local-complementation orbit of a small graph.
    Orbit(OrbitArgs),
}

#[derive(Args, Clone)]
struct Input {
    /// Built-in code name.
    #[arg(long, conflicts_with = "stabilizers")]
    code: Option<String>,
    /// Code file: signed Pauli strings, or HX/HZ parity-check sections.
    #[arg(long)]
    stabilizers: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum MethodArg {
    Befs,
    Beam,
    Mcts,
}

#[derive(Clone, Copy, ValueEnum)]
enum TieArg {
    Random,
    MinDegree,
}

#[derive(Clone, Copy, ValueEnum)]
enum CssArg {
    Auto,
    Off,
    Require,
}

#[derive(Clone, Copy, ValueEnum)]
enum MoveArg {
    SingleLc,
    Pivot,
}

impl From<MoveArg> for MoveSet {
    fn from(m: MoveArg) -> Self {
        match m {
            MoveArg::SingleLc => MoveSet::SingleLc,
            MoveArg::Pivot => MoveSet::Pivot,
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value = "befs")]
    method: MethodArg,
    /// Pivot-anneal the graph first and keep whichever graph compiles better.
    #[arg(long)]
    lc_opt: bool,
    #[arg(long, default_value_t = 5000)]
    lc_steps: usize,
    #[arg(long, default_value_t = 4)]
    lc_chains: usize,
    #[arg(long, value_enum, default_value = "random")]
    tie: TieArg,
    #[arg(long, default_value_t = 1000)]
    beam_width: usize,
    /// Sampled actions per beam state: a fraction in (0, 1] or a count.
    #[arg(long, default_value = "0.05")]
    actions: String,
    /// BeFS restarts, beam runs, or MCTS simulations per move.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, env = "GRAPHSYNTH_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    layer_penalty: f64,
    /// Divide edge deltas by the current edge count when scoring.
    #[arg(long)]
    normalize: bool,
    /// Stop once a circuit with at most this many two-qubit gates is found.
    #[arg(long)]
    stop_at: Option<usize>,
    /// Wall-clock limit in seconds; results then depend on timing.
    #[arg(long)]
    time_budget: Option<f64>,
    #[arg(long, default_value_t = 8)]
    mcts_k: usize,
    #[arg(long, default_value_t = 16)]
    mcts_m: usize,
    #[arg(long, default_value_t = 1.0)]
    mcts_c: f64,
    #[arg(long, default_value_t = 8)]
    mcts_depth: usize,
    #[arg(long, value_enum, default_value = "auto")]
    css_form: CssArg,
    /// Circuit output file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report output file; stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Leave the wall time out of the report so reruns compare byte for byte.
    #[arg(long)]
    omit_timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConvertFormat {
    Graph,
    PauliText,
    ParityCheckCss,
}

#[derive(Args)]
struct ConvertArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value = "graph")]
    to: ConvertFormat,
}

#[derive(Args)]
struct LcOptArgs {
    #[command(flatten)]
    input: Input,
    /// Graph JSON file `{"n": .., "edges": [[i, j], ..]}` instead of a code.
    #[arg(long, conflicts_with_all = ["code", "stabilizers"])]
    graph: Option<PathBuf>,
    #[arg(long, default_value_t = 20000)]
    steps: usize,
    #[arg(long, value_enum, default_value = "single-lc")]
    move_set: MoveArg,
    #[arg(long, default_value_t = 1.0)]
    w_edges: f64,
    #[arg(long, default_value_t = 0.0)]
    w_maxdeg: f64,
    #[arg(long, default_value_t = 0.999)]
    cooling: f64,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long, default_value_t = 4)]
    chains: usize,
    #[arg(long, env = "GRAPHSYNTH_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    circuit: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    /// Unix socket path; stdio when absent.
    #[arg(long)]
    socket: Option<PathBuf>,
}

#[derive(Args)]
struct OrbitArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, conflicts_with_all = ["code", "stabilizers"])]
    graph: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    cap: usize,
    /// Also list every orbit member's edges.
    #[arg(long)]
    list: bool,
}

/// A failure with its exit code and machine-readable error code.
struct Failure {
    exit: u8,
    code: &'static str,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { exit: 2, code: "usage_error", message: message.into() }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure { exit: 2, code: "io_error", message: format!("{}: {e}", path.display()) }
    }

    fn input(message: impl Into<String>) -> Self {
        Failure { exit: 2, code: "input_error", message: message.into() }
    }

    fn stage(message: impl Into<String>) -> Self {
        Failure { exit: 1, code: "synthesis_error", message: message.into() }
    }
}

type Outcome = Result<ExitCode, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::io(path, e))
}

fn load_input(input: &Input) -> Result<CodeSpec, Failure> {
    match (&input.code, &input.stabilizers) {
        (Some(name), None) => builtin(name).map_err(|e| Failure::input(e.to_string())),
        (None, Some(path)) => {
            let text = read(path)?;
            let format = if text.lines().any(|l| matches!(l.trim(), "HX" | "HZ")) {
                CodeFormat::ParityCheckCss
            } else {
                CodeFormat::PauliText
            };
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("code");
            load_code_str(&text, format, stem).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
        }
        _ => Err(Failure::usage("give exactly one of --code or --stabilizers")),
    }
}

#[derive(Deserialize)]
struct GraphFile {
    n: usize,
    edges: Vec<(usize, usize)>,
}

fn load_graph(path: &Path) -> Result<Graph, Failure> {
    let g: GraphFile = serde_json::from_str(&read(path)?)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    Graph::from_edges(g.n, &g.edges).map_err(|e| Failure::input(e.to_string()))
}

fn graph_json(g: &Graph) -> Value {
    json!({"n": g.n(), "edges": g.edge_list()})
}

fn graph_input(input: &Input, graph: &Option<PathBuf>) -> Result<Graph, Failure> {
    match graph {
        Some(p) => load_graph(p),
        None => {
            let spec = load_input(input)?;
            let t = spec.target_tableau().map_err(|e| Failure::input(e.to_string()))?;
            Ok(t.to_graph().graph)
        }
    }
}

/// Writes to stdout, treating a closed pipe (`| head`) as success.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn print_json(v: &impl Serialize) {
    emit(&(serde_json::to_string_pretty(v).expect("serializable") + "\n"));
}

fn sampled(actions: &str) -> Result<SampledActions, Failure> {
    if let Ok(k) = actions.parse::<usize>() {
        return Ok(SampledActions::Count(k));
    }
    actions
        .parse::<f64>()
        .map(SampledActions::Fraction)
        .map_err(|_| Failure::usage(format!("--actions expects a count or a fraction, got {actions}")))
}

fn synth(a: &SynthArgs) -> Outcome {
    let spec = load_input(&a.input)?;
    let target = spec.target_tableau().map_err(|e| Failure::input(e.to_string()))?;
    let score_params = ScoreParams::new(a.layer_penalty, a.normalize).map_err(|e| Failure::usage(e.to_string()))?;
    let search = |method, default_budget| SearchConfig {
        method,
        iterations: a.budget.unwrap_or(default_budget),
        beam_width: a.beam_width,
        tie_breaker: match a.tie {
            TieArg::Random => TieBreaker::Random,
            TieArg::MinDegree => TieBreaker::MinDegree,
        },
        score_params,
        seed: a.seed,
        time_budget: a.time_budget,
        stop_at: a.stop_at,
        ..SearchConfig::default()
    };
    use graphsynth::search::Method;
    let engine = match a.method {
        MethodArg::Befs => Engine::Befs(search(Method::Befs, 10_000)),
        MethodArg::Beam => Engine::Beam(SearchConfig { sampled_actions: sampled(&a.actions)?, ..search(Method::Beam, 1000) }),
        MethodArg::Mcts => Engine::Mcts(MctsConfig {
            simulations: a.budget.unwrap_or(512),
            k: a.mcts_k,
            m: a.mcts_m,
            c: a.mcts_c,
            max_depth: a.mcts_depth,
            seed: a.seed,
            ..MctsConfig::default()
        }),
    };
    let lc_opt = a.lc_opt.then(|| LcOptConfig {
        schedule: AnnealSchedule { steps: a.lc_steps, move_set: MoveSet::Pivot, seed: a.seed, ..AnnealSchedule::default() },
        chains: a.lc_chains,
    });
    let css_form = match a.css_form {
        CssArg::Auto => CssForm::Auto,
        CssArg::Off => CssForm::Off,
        CssArg::Require => CssForm::Require,
    };
    let cfg = PipelineConfig { engine, lc_opt, css_form };

    let start = Instant::now();
    let out = synthesize(&target, &cfg).map_err(|e| Failure::stage(e.to_string()))?;
    let wall = start.elapsed().as_secs_f64();

    let report = RunReport::new(&spec.name, &cfg, &out, (!a.omit_timing).then_some(wall));
    let text = report.to_json();
    if let Some(p) = &a.out {
        write(p, &out.circuit.to_text())?;
    }
    match &a.report {
        Some(p) => write(p, &text)?,
        None => emit(&(text + "\n")),
    }
    Ok(verdict_exit(&out.verdict))
}

fn verdict_exit(v: &Verdict) -> ExitCode {
    if v.is_exact() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn convert(a: &ConvertArgs) -> Outcome {
    let spec = load_input(&a.input)?;
    match a.to {
        ConvertFormat::Graph => {
            let t = spec.target_tableau().map_err(|e| Failure::input(e.to_string()))?;
            let form = t.to_graph();
            let frame: Vec<String> = (0..form.frame.n())
                .map(|q| form.frame.get(q).gates(q).iter().map(|g| g.name()).collect::<Vec<_>>().join(" "))
                .collect();
            print_json(&json!({
                "code": spec.name,
                "n": form.graph.n(),
                "edge_count": form.graph.edge_count(),
                "edges": form.graph.edge_list(),
                "frame": frame,
            }));
        }
        ConvertFormat::PauliText => emit(&spec.save(CodeFormat::PauliText)),
        ConvertFormat::ParityCheckCss => {
            if !spec.is_css() {
                return Err(Failure::input(format!("{} is not a CSS code", spec.name)));
            }
            emit(&spec.save(CodeFormat::ParityCheckCss))
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn lc_opt(a: &LcOptArgs) -> Outcome {
    let g = graph_input(&a.input, &a.graph)?;
    let s = AnnealSchedule {
        initial_temperature: a.temperature,
        cooling_factor: a.cooling,
        steps: a.steps,
        w_edges: a.w_edges,
        w_maxdeg: a.w_maxdeg,
        move_set: a.move_set.into(),
        seed: a.seed,
    };
    let r = anneal_chains(&g, &s, a.chains).map_err(|e| Failure::usage(e.to_string()))?;
    print_json(&json!({
        "initial_edges": g.edge_count(),
        "initial_max_degree": g.max_degree(),
        "final_edges": r.graph.edge_count(),
        "final_max_degree": r.graph.max_degree(),
        "initial_objective": r.initial_objective,
        "objective": r.objective,
        "moves": r.moves,
        "graph": graph_json(&r.graph),
    }));
    Ok(ExitCode::SUCCESS)
}

fn verify(a: &VerifyArgs) -> Outcome {
    let spec = load_input(&a.input)?;
    let target: StabilizerTableau = spec.target_tableau().map_err(|e| Failure::input(e.to_string()))?;
    let c = Circuit::parse(&read(&a.circuit)?).map_err(|e| Failure::input(format!("{}: {e}", a.circuit.display())))?;
    let v = c.verify(&target).map_err(|e| Failure::input(e.to_string()))?;
    let mut out = json!({
        "code": spec.name,
        "verdict": v.name(),
        "tq_gate_count": c.tq_count(),
        "tq_depth": c.tq_depth(),
    });
    if let Verdict::Fail { row, generator } = &v {
        out["failed_row"] = json!(row);
        out["failed_generator"] = json!(generator);
    }
    print_json(&out);
    Ok(verdict_exit(&v))
}

fn serve_bridge(a: &ServeArgs) -> Outcome {
    let r = match &a.socket {
        Some(p) => graphsynth_bridge::serve_unix(p).map_err(|e| Failure::io(p, e)),
        None => {
            let stdin = std::io::stdin().lock();
            graphsynth_bridge::serve(stdin, std::io::stdout().lock())
                .map(|_| ())
                .map_err(|e| Failure::io(Path::new("<stdio>"), e))
        }
    };
    r.map(|_| ExitCode::SUCCESS)
}

fn orbit(a: &OrbitArgs) -> Outcome {
    let g = graph_input(&a.input, &a.graph)?;
    let (members, complete) = match lc_orbit_bfs(&g, a.cap) {
        Ok(o) => (o, true),
        Err(LcOptError::OrbitCap { partial, .. }) => (partial, false),
        Err(e) => return Err(Failure::usage(e.to_string())),
    };
    let counts: Vec<usize> = members.iter().map(Graph::edge_count).collect();
    let mut out = json!({
        "complete": complete,
        "size": members.len(),
        "min_edges": counts.iter().min(),
        "max_edges": counts.iter().max(),
    });
    if a.list {
        out["members"] = Value::Array(members.iter().map(graph_json).collect());
    }
    print_json(&out);
    Ok(if complete { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            emit(&e.to_string());
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(Failure::usage(e.to_string().trim().to_string())),
    };
    if let Some(w) = cli.workers {
        if w == 0 {
            return fail(Failure::usage("--workers must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global().expect("pool configured once");
    }
    let outcome = match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Convert(a) => convert(a),
        Command::LcOpt(a) => lc_opt(a),
        Command::Verify(a) => verify(a),
        Command::ServeBridge(a) => serve_bridge(a),
        Command::Orbit(a) => orbit(a),
    };
    outcome.unwrap_or_else(fail)
}

fn fail(f: Failure) -> ExitCode {
    eprintln!("{}", json!({"error": {"code": f.code, "message": f.message}}));
    ExitCode::from(f.exit)
}
