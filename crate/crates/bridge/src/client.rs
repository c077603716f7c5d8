use std::io::{self, BufRead, Write};

use serde_json::{json, Value};

/// Minimal synchronous client: sends a request and returns the response with
/// the matching id, answering guidance requests through `on_guidance`.
pub struct Client<R, W> {
    reader: R,
    writer: W,
    next_id: u64,
}

impl<R: BufRead, W: Write> Client<R, W> {
    pub fn new(reader: R, writer: W) -> Self {
        Client { reader, writer, next_id: 0 }
    }

    pub fn send_raw(&mut self, line: &str) -> io::Result<()> {
        self.writer.write_all(line.as_bytes())?;
        self.writer.write_all(b"\n")?;
        self.writer.flush()
    }

    pub fn read(&mut self) -> io::Result<Value> {
        let mut line = String::new();
        if self.reader.read_line(&mut line)? == 0 {
            return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "server closed the stream"));
        }
        serde_json::from_str(&line).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    /// Sends `op` with `fields` and waits for its response. Server-initiated
    /// requests arriving meanwhile go to `on_guidance`, whose return value
    /// is sent back with the request's id.
    pub fn call_with(
        &mut self,
        op: &str,
        fields: Value,
        mut on_guidance: impl FnMut(&Value) -> Value,
    ) -> io::Result<Value> {
        self.next_id += 1;
        let id = self.next_id;
        let mut req = json!({"id": id, "op": op});
        if let (Some(obj), Value::Object(extra)) = (req.as_object_mut(), fields) {
            obj.extend(extra);
        }
        self.send_raw(&req.to_string())?;
        loop {
            let msg = self.read()?;
            match msg.get("op").and_then(Value::as_str) {
                Some("value_request") | Some("policy_request") => {
                    let mut reply = on_guidance(&msg);
                    if let Some(obj) = reply.as_object_mut() {
                        obj.insert("id".into(), msg["id"].clone());
                    }
                    self.send_raw(&reply.to_string())?;
                }
                _ if msg.get("id") == Some(&json!(id)) => return Ok(msg),
                _ => {
                    return Err(io::Error::new(io::ErrorKind::InvalidData, format!("unexpected message {msg}")));
                }
            }
        }
    }

    pub fn call(&mut self, op: &str, fields: Value) -> io::Result<Value> {
        self.call_with(op, fields, |_| json!({}))
    }
}
