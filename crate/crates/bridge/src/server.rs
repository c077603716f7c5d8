use std::io::{self, BufRead, BufReader, Write};
use std::os::unix::net::{UnixListener, UnixStream};
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Duration;

use graphsynth::codes::builtin;
use graphsynth::env::{enumerate_actions, EnvState};
use graphsynth::graph::{Action, Graph};
use graphsynth::mcts::{search_move, GuidanceProvider, HeuristicGuidance, MctsConfig};
use graphsynth::search::stream;
use graphsynth::tableau::StabilizerTableau;
use serde_json::{json, Map, Value};

use crate::{action_json, pack_bits, parse_action, ErrorCode, PROTOCOL};

type Reply = Result<Map<String, Value>, (ErrorCode, String)>;

fn fail<T>(code: ErrorCode, msg: impl Into<String>) -> Result<T, (ErrorCode, String)> {
    Err((code, msg.into()))
}

/// One client's environment.
#[derive(Default)]
pub struct Session {
    state: Option<EnvState>,
    guidance_seq: u64,
}

fn observation(state: &EnvState) -> Value {
    json!(pack_bits(&state.observe()))
}

fn graph_from_json(v: &Value) -> Result<Graph, (ErrorCode, String)> {
    let n = v.get("n").and_then(Value::as_u64).ok_or((ErrorCode::InvalidRequest, "graph needs n".into()))?;
    let mut edges = Vec::new();
    for e in v.get("edges").and_then(Value::as_array).into_iter().flatten() {
        let pair = e
            .as_array()
            .filter(|p| p.len() == 2)
            .and_then(|p| Some((p[0].as_u64()? as usize, p[1].as_u64()? as usize)))
            .ok_or((ErrorCode::InvalidRequest, format!("bad edge {e}")))?;
        edges.push(pair);
    }
    Graph::from_edges(n as usize, &edges).map_err(|e| (ErrorCode::InvalidRequest, e.to_string()))
}

impl Session {
    pub fn new() -> Self {
        Session::default()
    }

    pub fn state(&self) -> Option<&EnvState> {
        self.state.as_ref()
    }

    fn state_or_fail(&self) -> Result<&EnvState, (ErrorCode, String)> {
        self.state.as_ref().ok_or((ErrorCode::NoSession, "reset first".into()))
    }

    fn reset(&mut self, req: &Value) -> Reply {
        let graph = if let Some(name) = req.get("code").and_then(Value::as_str) {
            let spec = builtin(name).map_err(|e| (ErrorCode::InvalidRequest, e.to_string()))?;
            let t = spec.target_tableau().map_err(|e| (ErrorCode::InvalidRequest, e.to_string()))?;
            t.to_graph().graph
        } else if let Some(rows) = req.get("stabilizers").and_then(Value::as_array) {
            let lines: Vec<&str> = rows.iter().filter_map(Value::as_str).collect();
            let t = StabilizerTableau::parse_lines(&lines).map_err(|e| (ErrorCode::InvalidRequest, e.to_string()))?;
            t.to_graph().graph
        } else if let Some(g) = req.get("graph") {
            graph_from_json(g)?
        } else {
            return fail(ErrorCode::InvalidRequest, "reset needs code, graph or stabilizers");
        };
        let state = EnvState::new(graph);
        let mut out = Map::new();
        out.insert("n".into(), json!(state.graph().n()));
        out.insert("edges".into(), json!(state.graph().edge_count()));
        out.insert("observation".into(), observation(&state));
        self.state = Some(state);
        Ok(out)
    }

    fn step(&mut self, req: &Value) -> Reply {
        let state = self.state.as_mut().ok_or((ErrorCode::NoSession, "reset first".to_string()))?;
        let action = req
            .get("action")
            .and_then(parse_action)
            .ok_or((ErrorCode::InvalidAction, "action must be [kind, a, b] with a != b".to_string()))?;
        let masked = req.get("masked").and_then(Value::as_bool).unwrap_or(true);
        if state.is_terminal() {
            return fail(ErrorCode::InvalidAction, "graph is already edgeless");
        }
        let delta = state.step(action, masked).map_err(|e| (ErrorCode::InvalidAction, e.to_string()))?;
        let mut out = Map::new();
        out.insert("edge_delta".into(), json!(delta));
        out.insert("done".into(), json!(state.is_terminal()));
        out.insert("observation".into(), observation(state));
        Ok(out)
    }

    fn actions(&self, req: &Value) -> Reply {
        let state = self.state_or_fail()?;
        let masked = req.get("masked").and_then(Value::as_bool).unwrap_or(true);
        let list: Vec<Value> = enumerate_actions(state.graph(), masked).iter().map(action_json).collect();
        let mut out = Map::new();
        out.insert("actions".into(), Value::Array(list));
        Ok(out)
    }

    fn observe(&self) -> Reply {
        let state = self.state_or_fail()?;
        let mut out = Map::new();
        out.insert("observation".into(), observation(state));
        out.insert("edges".into(), json!(state.graph().edge_count()));
        out.insert("step".into(), json!(state.step_index()));
        out.insert("done".into(), json!(state.is_terminal()));
        Ok(out)
    }

    fn mcts_move<R: BufRead, W: Write>(&mut self, req: &Value, io: &mut Channel<R, W>) -> Reply {
        let state = self.state_or_fail()?.clone();
        if state.is_terminal() {
            return fail(ErrorCode::InvalidAction, "graph is already edgeless");
        }
        let mut cfg = MctsConfig::<f64>::default();
        let get = |k: &str| req.get(k).and_then(Value::as_u64).map(|v| v as usize);
        cfg.simulations = get("simulations").unwrap_or(cfg.simulations);
        cfg.k = get("k").unwrap_or(cfg.k);
        cfg.m = get("m").unwrap_or(cfg.m);
        cfg.max_depth = get("max_depth").unwrap_or(cfg.max_depth);
        cfg.c = req.get("c").and_then(Value::as_f64).unwrap_or(cfg.c);
        cfg.seed = req.get("seed").and_then(Value::as_u64).unwrap_or(0);
        cfg.masked = req.get("masked").and_then(Value::as_bool).unwrap_or(true);
        cfg.preserve_bipartite = req.get("preserve_bipartite").and_then(Value::as_bool).unwrap_or(true);
        cfg.validate().map_err(|e| (ErrorCode::InvalidRequest, e.to_string()))?;
        let mut rng = stream(cfg.seed, state.step_index() as u64);
        let mv = match req.get("guidance").and_then(Value::as_str).unwrap_or("heuristic") {
            "heuristic" => {
                let mut gp = HeuristicGuidance { preserve_bipartite: cfg.preserve_bipartite };
                search_move(&state, &cfg, &mut gp, &mut rng)
            }
            "external" => {
                let mut gp = ExternalGuidance { io, seq: &mut self.guidance_seq, failure: None };
                let r = search_move(&state, &cfg, &mut gp, &mut rng);
                if let Some(e) = gp.failure {
                    return fail(ErrorCode::Guidance, e);
                }
                r
            }
            other => return fail(ErrorCode::InvalidRequest, format!("unknown guidance {other}")),
        }
        .map_err(|e| (ErrorCode::InvalidRequest, e.to_string()))?;
        let mut out = Map::new();
        out.insert("action".into(), action_json(&mv.action));
        let visits: Vec<Value> = mv.visits.iter().map(|(a, v)| json!([a.kind().name(), a.a(), a.b(), v])).collect();
        out.insert("visits".into(), Value::Array(visits));
        Ok(out)
    }
}

/// Line transport shared by the session loop and the guidance callbacks.
pub(crate) struct Channel<R, W> {
    reader: R,
    writer: W,
}

impl<R: BufRead, W: Write> Channel<R, W> {
    fn read_line(&mut self) -> io::Result<Option<String>> {
        let mut line = String::new();
        loop {
            line.clear();
            if self.reader.read_line(&mut line)? == 0 {
                return Ok(None);
            }
            if !line.trim().is_empty() {
                return Ok(Some(line));
            }
        }
    }

    fn send(&mut self, v: &Value) -> io::Result<()> {
        serde_json::to_writer(&mut self.writer, v)?;
        self.writer.write_all(b"\n")?;
        self.writer.flush()
    }
}

/// Guidance answered by the client over the session's own stream.
pub struct ExternalGuidance<'a, R, W> {
    io: &'a mut Channel<R, W>,
    seq: &'a mut u64,
    failure: Option<String>,
}

impl<R: BufRead, W: Write> ExternalGuidance<'_, R, W> {
    /// Sends one request and waits for the reply field `key`.
    fn ask(&mut self, mut req: Map<String, Value>, key: &str, len: usize) -> Option<Vec<f64>> {
        if self.failure.is_some() {
            return None;
        }
        *self.seq += 1;
        let id = format!("g{}", self.seq);
        req.insert("id".into(), json!(id));
        let result = (|| {
            self.io.send(&Value::Object(req)).map_err(|e| e.to_string())?;
            let line = self.io.read_line().map_err(|e| e.to_string())?.ok_or("stream closed")?;
            let v: Value = serde_json::from_str(&line).map_err(|e| format!("bad reply: {e}"))?;
            if v.get("id") != Some(&json!(id)) {
                return Err(format!("reply id mismatch, expected {id}"));
            }
            let xs: Vec<f64> = v
                .get(key)
                .and_then(Value::as_array)
                .ok_or(format!("reply lacks {key}"))?
                .iter()
                .map(|x| x.as_f64().filter(|f| f.is_finite()).ok_or(format!("non-numeric {key}")))
                .collect::<Result<_, _>>()?;
            if xs.len() != len {
                return Err(format!("expected {len} {key}, got {}", xs.len()));
            }
            Ok(xs)
        })();
        match result {
            Ok(xs) => Some(xs),
            Err(e) => {
                self.failure = Some(e);
                None
            }
        }
    }
}

impl<R: BufRead, W: Write> GuidanceProvider<f64> for ExternalGuidance<'_, R, W> {
    fn value(&mut self, state: &EnvState) -> f64 {
        self.values(&[state])[0]
    }

    fn values(&mut self, states: &[&EnvState]) -> Vec<f64> {
        let mut req = Map::new();
        req.insert("op".into(), json!("value_request"));
        let obs: Vec<Value> = states.iter().map(|s| observation(s)).collect();
        req.insert("observations".into(), Value::Array(obs));
        self.ask(req, "values", states.len()).unwrap_or_else(|| vec![0.0; states.len()])
    }

    fn policy(&mut self, state: &EnvState, actions: &[Action]) -> Vec<f64> {
        let mut req = Map::new();
        req.insert("op".into(), json!("policy_request"));
        req.insert("observation".into(), observation(state));
        req.insert("actions".into(), Value::Array(actions.iter().map(action_json).collect()));
        match self.ask(req, "priors", actions.len()) {
            Some(p) if p.iter().all(|x| *x >= 0.0) => p,
            Some(_) => {
                self.failure = Some("priors must be non-negative".into());
                vec![1.0; actions.len()]
            }
            None => vec![1.0; actions.len()],
        }
    }
}

/// How a session ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SessionEnd {
    Shutdown,
    Disconnected,
}

/// Serves one session until `shutdown` or end of input.
pub fn serve<R: BufRead, W: Write>(reader: R, writer: W) -> io::Result<SessionEnd> {
    let mut io = Channel { reader, writer };
    let mut session = Session::new();
    while let Some(line) = io.read_line()? {
        let req: Value = match serde_json::from_str(&line) {
            Ok(v @ Value::Object(_)) => v,
            Ok(_) => {
                io.send(&error_reply(&Value::Null, ErrorCode::Parse, "request must be a JSON object"))?;
                continue;
            }
            Err(e) => {
                io.send(&error_reply(&Value::Null, ErrorCode::Parse, &e.to_string()))?;
                continue;
            }
        };
        let id = req.get("id").cloned().unwrap_or(Value::Null);
        if let Some(v) = req.get("version") {
            if v.as_str() != Some(PROTOCOL) {
                io.send(&error_reply(&id, ErrorCode::Version, &format!("server speaks {PROTOCOL}, got {v}")))?;
                continue;
            }
        }
        let op = req.get("op").and_then(Value::as_str).unwrap_or("");
        let reply = match op {
            "reset" => session.reset(&req),
            "step" => session.step(&req),
            "actions" => session.actions(&req),
            "observe" => session.observe(),
            "mcts_move" => session.mcts_move(&req, &mut io),
            "shutdown" => {
                io.send(&json!({"id": id, "ok": true}))?;
                return Ok(SessionEnd::Shutdown);
            }
            "value_request" | "policy_request" => {
                fail(ErrorCode::InvalidRequest, format!("{op} is sent by the server during mcts_move"))
            }
            "" => fail(ErrorCode::InvalidRequest, "missing op"),
            other => fail(ErrorCode::UnknownOp, format!("unknown op {other}")),
        };
        match reply {
            Ok(mut body) => {
                let mut out = Map::new();
                out.insert("id".into(), id);
                out.insert("ok".into(), json!(true));
                out.append(&mut body);
                io.send(&Value::Object(out))?;
            }
            Err((code, msg)) => io.send(&error_reply(&id, code, &msg))?,
        }
    }
    Ok(SessionEnd::Disconnected)
}

fn error_reply(id: &Value, code: ErrorCode, msg: &str) -> Value {
    json!({"id": id, "ok": false, "error": {"code": code.as_str(), "message": msg}})
}

/// Listens on a Unix socket, one thread per connection, until some session
/// sends `shutdown`.
pub fn serve_unix(path: &Path) -> io::Result<()> {
    let listener = UnixListener::bind(path)?;
    listener.set_nonblocking(true)?;
    let stop = Arc::new(AtomicBool::new(false));
    let mut workers = Vec::new();
    while !stop.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((conn, _)) => {
                conn.set_nonblocking(false)?;
                let stop = Arc::clone(&stop);
                workers.push(std::thread::spawn(move || {
                    if let Ok(SessionEnd::Shutdown) = session_on(conn) {
                        stop.store(true, Ordering::SeqCst);
                    }
                }));
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => std::thread::sleep(Duration::from_millis(10)),
            Err(e) => return Err(e),
        }
    }
    for w in workers {
        let _ = w.join();
    }
    let _ = std::fs::remove_file(path);
    Ok(())
}

fn session_on(conn: UnixStream) -> io::Result<SessionEnd> {
    let reader = BufReader::new(conn.try_clone()?);
    serve(reader, conn)
}
