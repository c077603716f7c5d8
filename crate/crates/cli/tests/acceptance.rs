//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test -p graphsynth-cli --test acceptance`.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use graphsynth::circuit::{css_cx_form, peephole, reconstruct, relayer, unitary_equivalent, Circuit};
use graphsynth::codes::{builtin, load_code, CodeFormat, BUILTIN_NAMES};
use graphsynth::env::{action_count, enumerate_actions, ScoreParams};
use graphsynth::gate::Gate;
use graphsynth::graph::{Action, ActionKind, Graph};
use graphsynth::lc_opt::{anneal_chains, lc_frame, lc_orbit_bfs, AnnealSchedule, MoveSet};
use graphsynth::pipeline::{synthesize, CssForm, Engine, LcOptConfig, PipelineConfig, PipelineError, PipelineOutput};
use graphsynth::search::{stream, Method, SampledActions, SearchConfig};
use graphsynth::tableau::StabilizerTableau;
use rand::Rng;

type Check = fn() -> Result<String, String>;

/// Every circuit synthesized anywhere in the suite, with its verdict.
static VERIFIED: Mutex<Vec<(String, bool)>> = Mutex::new(Vec::new());

fn record(label: impl Into<String>, exact: bool) {
    VERIFIED.lock().unwrap().push((label.into(), exact));
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn load_graph(name: &str) -> Graph {
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap();
    let n = v["n"].as_u64().unwrap() as usize;
    let edges: Vec<(usize, usize)> = v["edges"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e[0].as_u64().unwrap() as usize, e[1].as_u64().unwrap() as usize))
        .collect();
    Graph::from_edges(n, &edges).unwrap()
}

fn befs(iterations: usize, seed: u64) -> SearchConfig<f64> {
    SearchConfig {
        iterations,
        seed,
        score_params: ScoreParams::new(0.1, true).unwrap(),
        ..SearchConfig::default()
    }
}

fn run_pipeline(label: &str, target: &StabilizerTableau, cfg: &PipelineConfig<f64>) -> Result<PipelineOutput, PipelineError> {
    let out = synthesize(target, cfg)?;
    record(label, out.verdict.is_exact());
    Ok(out)
}

fn code_target(name: &str) -> StabilizerTableau {
    builtin(name).unwrap().target_tableau().unwrap()
}

// Reference (two-qubit gates, two-qubit depth) per code.
const SMALL_CODES: [(&str, usize, usize); 6] = [
    ("surface_9", 8, 3),
    ("carbon_12", 16, 5),
    ("reed_muller_15", 23, 5),
    ("hamming_15", 22, 4),
    ("color_17", 23, 4),
    ("color_19", 27, 4),
];

fn small_code_parity() -> Result<String, String> {
    let mut parts = Vec::new();
    let mut ok = true;
    for (code, tq, depth) in SMALL_CODES {
        let cfg = PipelineConfig {
            engine: Engine::Befs(befs(10_000, 1)),
            lc_opt: Some(LcOptConfig {
                schedule: AnnealSchedule { steps: 5000, move_set: MoveSet::Pivot, seed: 1, ..AnnealSchedule::default() },
                chains: 4,
            }),
            css_form: CssForm::Auto,
        };
        let start = Instant::now();
        let out = run_pipeline(code, &code_target(code), &cfg).map_err(|e| format!("{code}: {e}"))?;
        let secs = start.elapsed().as_secs_f64();
        let (got_tq, got_depth) = (out.circuit.tq_count(), out.circuit.tq_depth());
        let pass = got_tq == tq && got_depth <= depth + 1 && secs < 60.0 && out.verdict.is_exact();
        ok &= pass;
        let mark = if pass { "" } else { " MISS" };
        parts.push(format!("{code} ({got_tq},{got_depth}) vs ({tq},{depth}) {secs:.1}s{mark}"));
    }
    let detail = parts.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn golay_beam() -> Result<String, String> {
    let cfg = SearchConfig::<f64> {
        method: Method::Beam,
        iterations: 1000,
        beam_width: 1000,
        sampled_actions: SampledActions::Fraction(0.05),
        masked: true,
        seed: 1,
        time_budget: Some(600.0),
        stop_at: Some(47),
        ..SearchConfig::default()
    };
    let pc = PipelineConfig { engine: Engine::Beam(cfg), lc_opt: None, css_form: CssForm::Auto };
    let start = Instant::now();
    let out = run_pipeline("golay_23 beam", &code_target("golay_23"), &pc).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let detail = format!(
        "TQG {} depth {} after {} of 1000 runs in {secs:.1}s",
        out.circuit.tq_count(),
        out.circuit.tq_depth(),
        out.search.iterations_used
    );
    if out.circuit.tq_count() <= 47 && secs < 600.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn golay_befs() -> Result<String, String> {
    let cfg = SearchConfig { stop_at: Some(48), ..befs(100_000, 1) };
    let pc = PipelineConfig { engine: Engine::Befs(cfg), lc_opt: None, css_form: CssForm::Auto };
    let out = run_pipeline("golay_23 befs", &code_target("golay_23"), &pc).map_err(|e| e.to_string())?;
    let detail = format!(
        "TQG {} depth {} after {} of 100000 restarts",
        out.circuit.tq_count(),
        out.circuit.tq_depth(),
        out.search.iterations_used
    );
    if out.circuit.tq_count() <= 48 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Decimation log undoing the seven-gate preparation of the six-node example.
fn six_node_log() -> Vec<Action> {
    vec![
        Action::cz(2, 5),
        Action::cz(3, 4),
        Action::cy(1, 3),
        Action::cy(0, 4),
        Action::cz(4, 5),
        Action::cz(2, 3),
        Action::cz(0, 1),
    ]
}

fn six_node_graph() -> Graph {
    let mut g = Graph::new(6);
    for a in six_node_log().iter().rev() {
        g.apply_action_in_place(a).unwrap();
    }
    g
}

fn correctness() -> Result<String, String> {
    // Fixtures not already synthesized by other criteria.
    for name in BUILTIN_NAMES {
        let pc = PipelineConfig { engine: Engine::Befs(befs(100, 3)), lc_opt: None, css_form: CssForm::Auto };
        run_pipeline(name, &code_target(name), &pc).map_err(|e| format!("{name}: {e}"))?;
        let mcts = PipelineConfig {
            engine: Engine::Mcts(graphsynth::mcts::MctsConfig { simulations: 256, seed: 3, ..Default::default() }),
            lc_opt: None,
            css_form: CssForm::Auto,
        };
        run_pipeline(&format!("{name} mcts"), &code_target(name), &mcts).map_err(|e| format!("{name}: {e}"))?;
    }
    let toric = load_code(&fixture("toric_8x8.pcm"), CodeFormat::ParityCheckCss).map_err(|e| e.to_string())?;
    let pc = PipelineConfig { engine: Engine::Befs(befs(20, 1)), lc_opt: None, css_form: CssForm::Require };
    run_pipeline("toric_8x8", &toric.target_tableau().unwrap(), &pc).map_err(|e| format!("toric: {e}"))?;
    let five = load_code(&fixture("five_qubit_x8.pauli"), CodeFormat::PauliText).map_err(|e| e.to_string())?;
    let pc = PipelineConfig { engine: Engine::Befs(befs(50, 1)), lc_opt: Some(LcOptConfig { schedule: AnnealSchedule { steps: 2000, ..Default::default() }, chains: 2 }), css_form: CssForm::Off };
    run_pipeline("five_qubit_x8", &five.target_tableau().unwrap(), &pc).map_err(|e| format!("five_qubit_x8: {e}"))?;
    // Annealed graph of the scrambled 144-node fixture: same state up to the
    // tracked local Cliffords, and at least 40% fewer edges.
    let g = load_graph("lc_scrambled_144.json");
    let r = anneal_chains(&g, &AnnealSchedule::<f64> { steps: 20_000, seed: 1, ..Default::default() }, 2)
        .map_err(|e| e.to_string())?;
    let (h, u) = lc_frame(&g, &r.moves);
    let mut t = StabilizerTableau::graph_state(&g);
    t.apply_all(&u.gates()).unwrap();
    record("lc_scrambled_144 anneal", h == r.graph && t.same_state(&StabilizerTableau::graph_state(&h)));
    if r.graph.edge_count() * 10 > g.edge_count() * 6 {
        return Err(format!("anneal kept {} of {} edges", r.graph.edge_count(), g.edge_count()));
    }

    let verified = VERIFIED.lock().unwrap();
    let failed: Vec<&str> = verified.iter().filter(|(_, ok)| !ok).map(|(l, _)| l.as_str()).collect();
    let detail = format!("{} of {} circuits exact", verified.len() - failed.len(), verified.len());
    if failed.is_empty() && !verified.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; failing: {}", failed.join(", ")))
    }
}

fn graph_from_mask(n: usize, mask: u32) -> Graph {
    let mut g = Graph::new(n);
    let mut bit = 0;
    for i in 0..n {
        for j in i + 1..n {
            if mask >> bit & 1 == 1 {
                g.toggle_edge(i, j).unwrap();
            }
            bit += 1;
        }
    }
    g
}

fn oracle_equivalence() -> Result<String, String> {
    let start = Instant::now();
    let (mut checked, mut mismatches) = (0, 0);
    for mask in 0..1024u32 {
        let g = graph_from_mask(5, mask);
        let base = StabilizerTableau::graph_state(&g);
        let actions = enumerate_actions(&g, false);
        if actions.len() != 50 {
            return Err(format!("{} actions on five nodes", actions.len()));
        }
        for a in actions {
            // Graph-level CY is the gate CY followed by S on the control.
            let gates = match a.kind() {
                ActionKind::Cz => vec![Gate::Cz(a.a(), a.b())],
                ActionKind::Cx => vec![Gate::Cx(a.a(), a.b())],
                ActionKind::Cy => vec![Gate::Cy(a.a(), a.b()), Gate::S(a.a())],
            };
            let mut t = base.clone();
            t.apply_all(&gates).unwrap();
            let expected = StabilizerTableau::graph_state(&g.apply_action(&a).unwrap());
            checked += 1;
            if !t.same_up_to_pauli(&expected) {
                mismatches += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let detail = format!("{checked} (graph, action) pairs, {mismatches} mismatches, {secs:.1}s");
    if mismatches == 0 && checked == 51_200 && secs < 30.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_graph(rng: &mut impl Rng, n: usize) -> Graph {
    let p: f64 = rng.gen();
    let mut g = Graph::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                g.toggle_edge(i, j).unwrap();
            }
        }
    }
    g
}

fn action_count_law() -> Result<String, String> {
    for n in 2..=200 {
        let got = enumerate_actions(&Graph::new(n), false).len();
        if got != 5 * n * (n - 1) / 2 || got != action_count(n) {
            return Err(format!("N={n}: {got} actions"));
        }
    }
    let mut rng = stream(11, 0);
    for _ in 0..10_000 {
        let n = rng.gen_range(2..=24);
        let g = random_graph(&mut rng, n);
        let (all, masked) = (enumerate_actions(&g, false).len(), enumerate_actions(&g, true).len());
        if masked > all {
            return Err(format!("masked {masked} > unmasked {all}"));
        }
    }
    Ok("unmasked = 5/2 N(N-1) for N in 2..=200; masked <= unmasked on 10^4 random graphs".into())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn canonical_form(g: &Graph, perms: &[Vec<usize>]) -> Vec<(usize, usize)> {
    perms
        .iter()
        .map(|p| {
            let mut e: Vec<(usize, usize)> = g.edges().map(|(a, b)| (p[a].min(p[b]), p[a].max(p[b]))).collect();
            e.sort_unstable();
            e
        })
        .min()
        .unwrap()
}

fn lc_orbit_facts() -> Result<String, String> {
    for n in 3..=8 {
        let orbit = lc_orbit_bfs(&Graph::star(n, 0), 10_000).map_err(|e| e.to_string())?;
        let complete = Graph::complete(n);
        let stars = (0..n).map(|c| Graph::star(n, c)).collect::<Vec<_>>();
        if !orbit.iter().all(|g| *g == complete || stars.contains(g)) || !orbit.contains(&complete) {
            return Err(format!("star orbit on {n} nodes leaves {{star, complete}}"));
        }
    }
    let g = six_node_graph();
    let target = StabilizerTableau::graph_state(&g);
    let c = relayer(&peephole(&reconstruct(&g, &six_node_log(), None, &target).map_err(|e| e.to_string())?));
    let exact = c.verify(&target).unwrap().is_exact();
    record("six-node example", exact);
    if !exact || c.tq_count() != 7 {
        return Err(format!("six-node circuit: {} gates, exact {exact}", c.tq_count()));
    }
    let orbit = lc_orbit_bfs(&g, 10_000).map_err(|e| e.to_string())?;
    let min = orbit.iter().map(Graph::edge_count).min().unwrap();
    let perms = permutations(6);
    let classes: BTreeSet<_> = orbit.iter().map(|h| canonical_form(h, &perms)).collect();
    if min != 9 || classes.len() != 2 {
        return Err(format!("six-node orbit: min |E| {min}, {} classes", classes.len()));
    }
    let mut rng = stream(12, 0);
    for _ in 0..10_000 {
        let n = rng.gen_range(1..=16);
        let g = random_graph(&mut rng, n);
        let v = rng.gen_range(0..n);
        if g.local_complement(v).unwrap().local_complement(v).unwrap() != g {
            return Err("local complementation is not an involution".into());
        }
    }
    Ok(format!(
        "star orbit = {{star, complete}} for N=3..8; six-node orbit {} graphs, 2 classes, min |E| 9, prepared with 7 gates; involution on 10^4 pairs",
        orbit.len()
    ))
}

fn css_property() -> Result<String, String> {
    let mut targets: Vec<(String, StabilizerTableau)> =
        BUILTIN_NAMES.iter().map(|n| (n.to_string(), code_target(n))).collect();
    let toric = load_code(&fixture("toric_8x8.pcm"), CodeFormat::ParityCheckCss).map_err(|e| e.to_string())?;
    targets.push(("toric_8x8".into(), toric.target_tableau().unwrap()));
    for (name, target) in &targets {
        let pc = PipelineConfig { engine: Engine::Befs(befs(100, 2)), lc_opt: None, css_form: CssForm::Off };
        let out = run_pipeline(name, target, &pc).map_err(|e| format!("{name}: {e}"))?;
        if out.search.actions.iter().any(|a| a.kind() == ActionKind::Cy) {
            return Err(format!("{name}: CY in the log of a bipartite graph"));
        }
        let (_, b) = out.decimated_graph.bipartition().ok_or(format!("{name}: graph not bipartite"))?;
        let mut in_a = vec![false; target.n()];
        b.iter().for_each(|&q| in_a[q] = true);
        let cx = css_cx_form(&out.circuit, &in_a).map_err(|e| format!("{name}: {e}"))?;
        let cx_only = cx.gates().iter().filter(|g| g.is_two_qubit()).all(|g| matches!(g, Gate::Cx(..)));
        if !cx_only || cx.tq_count() != out.circuit.tq_count() || !cx.verify(target).unwrap().is_exact() {
            return Err(format!("{name}: CX form changed the circuit"));
        }
    }
    let five = load_code(&fixture("five_qubit_x8.pauli"), CodeFormat::PauliText).map_err(|e| e.to_string())?;
    let target = five.target_tableau().unwrap();
    let pc = PipelineConfig { engine: Engine::Befs(befs(50, 1)), lc_opt: None, css_form: CssForm::Require };
    match synthesize(&target, &pc) {
        Err(PipelineError::NotBipartite) | Err(PipelineError::Compile(_)) => {}
        other => return Err(format!("non-CSS fixture: expected an error, got {:?}", other.map(|o| o.circuit.tq_count()))),
    }
    let off = synthesize(&target, &PipelineConfig { css_form: CssForm::Off, ..pc }).map_err(|e| e.to_string())?;
    if css_cx_form(&off.circuit, &vec![false; target.n()]).is_ok() {
        return Err("non-CSS circuit accepted by the CX rewrite".into());
    }
    Ok(format!("{} CSS fixtures CX-only with unchanged TQG; 40-qubit non-CSS rejected", targets.len()))
}

fn compiler_properties() -> Result<String, String> {
    let mut checked = 0;
    for name in BUILTIN_NAMES {
        let pc = PipelineConfig { engine: Engine::Befs(befs(50, 4)), lc_opt: None, css_form: CssForm::Off };
        let out = run_pipeline(name, &code_target(name), &pc).map_err(|e| e.to_string())?;
        let g = &out.decimated_graph;
        let target = StabilizerTableau::graph_state(g);
        let raw = reconstruct(g, &out.search.actions, None, &target).map_err(|e| e.to_string())?;
        let p = peephole(&raw);
        let r = relayer(&p);
        if p.tq_count() > raw.tq_count() {
            return Err(format!("{name}: peephole raised TQG {} -> {}", raw.tq_count(), p.tq_count()));
        }
        if r.tq_depth() > p.tq_depth() || r.tq_count() != p.tq_count() {
            return Err(format!("{name}: relayer raised depth {} -> {}", p.tq_depth(), r.tq_depth()));
        }
        if !unitary_equivalent(&raw, &p) || !unitary_equivalent(&p, &r) || !r.verify(&target).unwrap().is_exact() {
            return Err(format!("{name}: compile pass changed the state"));
        }
        checked += 1;
    }
    let ghz = Circuit::parse(&std::fs::read_to_string(fixture("ghz8_tree.circ")).unwrap()).map_err(|e| e.to_string())?;
    let r = relayer(&ghz);
    if ghz.tq_depth() != 7 || r.tq_depth() != 3 || !unitary_equivalent(&ghz, &r) {
        return Err(format!("GHZ tree depth {} -> {}", ghz.tq_depth(), r.tq_depth()));
    }
    Ok(format!("{checked} codes: peephole TQG non-increasing, relayer depth non-increasing and equivalent; GHZ-8 tree depth 7 -> 3"))
}

fn determinism() -> Result<String, String> {
    let bin = env!("CARGO_BIN_EXE_graphsynth");
    let mut runs = 0;
    for (method, budget) in [("befs", "2000"), ("beam", "5"), ("mcts", "256")] {
        for workers in ["1", "2"] {
            let report = || {
                let o = Command::new(bin)
                    .args(["--workers", workers, "synth", "--code", "carbon_12", "--method", method, "--budget", budget])
                    .args(["--seed", "5", "--lc-opt", "--lc-steps", "1000", "--omit-timing"])
                    .env_remove("GRAPHSYNTH_SEED")
                    .output()
                    .unwrap();
                (o.status.success(), o.stdout)
            };
            let (a, b) = (report(), report());
            if !a.0 || a != b {
                return Err(format!("{method} with {workers} worker(s) differs between runs"));
            }
            runs += 2;
        }
    }
    Ok(format!("{runs} runs: befs, beam, mcts reports byte-identical per (seed, workers)"))
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 10] = [
        ("small-code parity", small_code_parity),
        ("golay beam <= 47", golay_beam),
        ("golay befs 10^5 <= 48", golay_befs),
        ("oracle equivalence", oracle_equivalence),
        ("action-count law", action_count_law),
        ("lc-orbit facts", lc_orbit_facts),
        ("css property", css_property),
        ("compiler properties", compiler_properties),
        ("determinism", determinism),
        // Last: counts every circuit the other criteria produced.
        ("correctness suite", correctness),
    ];
    let mut failed = 0;
    let total = Instant::now();
    for (name, check) in checks {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let took = fmt_secs(start.elapsed());
        match result {
            Ok(detail) => println!("PASS {name} [{took}]: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} [{took}]: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed in {}", 10 - failed, fmt_secs(total.elapsed()));
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn fmt_secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}
