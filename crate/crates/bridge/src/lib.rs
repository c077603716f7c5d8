//! JSON-lines bridge to the decimation environment, protocol
//! `graphsynth-bridge/1`.
//!
//! Every request is one JSON object per line with an `op` and an `id`; every
//! request gets exactly one response echoing the `id`:
//!
//! ```text
//! -> {"id":1,"op":"reset","version":"graphsynth-bridge/1","code":"surface_9"}
//! <- {"id":1,"ok":true,"n":9,"edges":10,"observation":{"bits":36,"data":"..."}}
//! -> {"id":2,"op":"step","action":["CX",0,3]}
//! <- {"id":2,"ok":true,"edge_delta":2,"done":false,"observation":{...}}
//! ```
//!
//! Failures answer `{"id":..,"ok":false,"error":{"code":..,"message":..}}`
//! with codes `parse_error`, `invalid_request`, `unknown_op`, `no_session`,
//! `invalid_action`, `version_error` and `guidance_error`.
//!
//! During `mcts_move` with `"guidance":"external"` the server turns around and
//! sends `value_request` / `policy_request` lines to the client, one at a
//! time, and blocks until the client answers with the same `id`.

mod client;
mod server;

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use graphsynth::graph::{Action, ActionKind};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use client::Client;
pub use server::{serve, serve_unix, ExternalGuidance, Session, SessionEnd};

pub const PROTOCOL: &str = "graphsynth-bridge/1";

/// Bit vector packed most-significant-bit first and base64 encoded.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackedBits {
    pub bits: usize,
    pub data: String,
}

pub fn pack_bits(bits: &[bool]) -> PackedBits {
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            bytes[i / 8] |= 0x80 >> (i % 8);
        }
    }
    PackedBits { bits: bits.len(), data: STANDARD.encode(bytes) }
}

pub fn unpack_bits(p: &PackedBits) -> Option<Vec<bool>> {
    let bytes = STANDARD.decode(&p.data).ok()?;
    if bytes.len() != p.bits.div_ceil(8) {
        return None;
    }
    Some((0..p.bits).map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0).collect())
}

pub fn action_json(a: &Action) -> Value {
    json!([a.kind().name(), a.a(), a.b()])
}

pub fn parse_action(v: &Value) -> Option<Action> {
    let arr = v.as_array()?;
    if arr.len() != 3 {
        return None;
    }
    let kind = ActionKind::parse(arr[0].as_str()?)?;
    let a = usize::try_from(arr[1].as_u64()?).ok()?;
    let b = usize::try_from(arr[2].as_u64()?).ok()?;
    Action::new(kind, a, b).ok()
}

/// Machine-readable error codes of the protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorCode {
    Parse,
    InvalidRequest,
    UnknownOp,
    NoSession,
    InvalidAction,
    Version,
    Guidance,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::Parse => "parse_error",
            ErrorCode::InvalidRequest => "invalid_request",
            ErrorCode::UnknownOp => "unknown_op",
            ErrorCode::NoSession => "no_session",
            ErrorCode::InvalidAction => "invalid_action",
            ErrorCode::Version => "version_error",
            ErrorCode::Guidance => "guidance_error",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_pack_msb_first() {
        let p = pack_bits(&[true, false, false, false, false, false, false, true, true]);
        assert_eq!(p.bits, 9);
        assert_eq!(STANDARD.decode(&p.data).unwrap(), vec![0x81, 0x80]);
        assert_eq!(unpack_bits(&p).unwrap().len(), 9);
        let bad = PackedBits { bits: 20, data: p.data.clone() };
        assert!(unpack_bits(&bad).is_none());
    }

    #[test]
    fn actions_round_trip() {
        for a in [Action::cz(3, 1), Action::cx(0, 2), Action::cy(5, 4)] {
            assert_eq!(parse_action(&action_json(&a)), Some(a));
        }
        assert_eq!(parse_action(&json!(["CX", 1, 1])), None);
        assert_eq!(parse_action(&json!(["SWAP", 0, 1])), None);
        assert_eq!(parse_action(&json!(["CZ", 0])), None);
    }
}
