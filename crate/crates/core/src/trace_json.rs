//! JSON-lines encoding of traces: one event object per line, the terminal mark last.

use serde_json::{json, Map, Value as Json};
use thiserror::Error;

use crate::trace::{Event, Rational, TerminalMark, TracePrefix, Value};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceJsonError {
    #[error("line {line}: invalid JSON: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {msg}")]
    Shape { line: usize, msg: String },
    #[error("trace has no terminal mark")]
    MissingEnd,
    #[error("line {line}: content after the terminal mark")]
    TrailingContent { line: usize },
}

fn shape(line: usize, msg: impl Into<String>) -> TraceJsonError {
    TraceJsonError::Shape { line, msg: msg.into() }
}

pub fn value_to_json(v: &Value) -> Json {
    match v {
        Value::Nat(n) => json!({ "nat": n }),
        Value::Bool(b) => json!({ "bool": b }),
    }
}

pub fn value_from_json(j: &Json) -> Option<Value> {
    let obj = j.as_object()?;
    if obj.len() != 1 {
        return None;
    }
    if let Some(n) = obj.get("nat") {
        return n.as_u64().map(Value::Nat);
    }
    obj.get("bool").and_then(Json::as_bool).map(Value::Bool)
}

fn rational_to_string(q: &Rational) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().ok()?;
            let d: i64 = d.trim().parse().ok()?;
            (d != 0).then(|| Rational::new(n, d))
        }
        None => s.trim().parse::<i64>().ok().map(Rational::from_integer),
    }
}

pub fn event_to_json(e: &Event) -> Json {
    match e {
        Event::Read(n) => json!({"ev": "rd", "n": n}),
        Event::Write(n) => json!({"ev": "wr", "n": n}),
        Event::PubIn(n) => json!({"ev": "pubin", "n": n}),
        Event::PubOut(n) => json!({"ev": "pubout", "n": n}),
        Event::PrivIn(n) => json!({"ev": "privin", "n": n}),
        Event::Out(q) => json!({"ev": "out", "q": rational_to_string(q)}),
        Event::Call(f, v) => json!({"ev": "call", "f": f, "v": value_to_json(v)}),
        Event::Ret(v) => json!({"ev": "ret", "v": value_to_json(v)}),
        Event::FailAct => json!({"ev": "failact"}),
    }
}

pub fn end_to_json(end: &TerminalMark) -> Json {
    match end {
        TerminalMark::Open => json!({"end": "open"}),
        TerminalMark::Terminated(None) => json!({"end": "term"}),
        TerminalMark::Terminated(Some(p)) => json!({"end": "term", "eps": p}),
        TerminalMark::SilentDiv => json!({"end": "div"}),
        TerminalMark::Truncated(s) => json!({"end": "trunc", "steps": s}),
    }
}

fn get_u64(o: &Map<String, Json>, k: &str, line: usize) -> Result<u64, TraceJsonError> {
    o.get(k).and_then(Json::as_u64).ok_or_else(|| shape(line, format!("field `{k}` must be a natural")))
}

fn get_i64(o: &Map<String, Json>, k: &str, line: usize) -> Result<i64, TraceJsonError> {
    o.get(k).and_then(Json::as_i64).ok_or_else(|| shape(line, format!("field `{k}` must be an integer")))
}

fn get_value(o: &Map<String, Json>, line: usize) -> Result<Value, TraceJsonError> {
    o.get("v").and_then(value_from_json).ok_or_else(|| shape(line, "field `v` must be {\"nat\":n} or {\"bool\":b}"))
}

/// Decodes either an event object or a terminal-mark object.
pub fn item_from_json(j: &Json, line: usize) -> Result<Result<Event, TerminalMark>, TraceJsonError> {
    let o = j.as_object().ok_or_else(|| shape(line, "expected an object"))?;
    if let Some(end) = o.get("end") {
        let mark = match end.as_str() {
            Some("open") => TerminalMark::Open,
            Some("term") => TerminalMark::Terminated(o.get("eps").and_then(Json::as_i64)),
            Some("div") => TerminalMark::SilentDiv,
            Some("trunc") => TerminalMark::Truncated(get_u64(o, "steps", line)?),
            _ => return Err(shape(line, "unknown terminal mark")),
        };
        return Ok(Err(mark));
    }
    let ev = o.get("ev").and_then(Json::as_str).ok_or_else(|| shape(line, "missing `ev` or `end`"))?;
    let e = match ev {
        "rd" => Event::Read(get_u64(o, "n", line)?),
        "wr" => Event::Write(get_u64(o, "n", line)?),
        "pubin" => Event::PubIn(get_i64(o, "n", line)?),
        "pubout" => Event::PubOut(get_i64(o, "n", line)?),
        "privin" => Event::PrivIn(get_i64(o, "n", line)?),
        "out" => {
            let q = match o.get("q") {
                Some(Json::String(s)) => parse_rational(s),
                Some(n) => n.as_i64().map(Rational::from_integer),
                None => None,
            };
            Event::Out(q.ok_or_else(|| shape(line, "field `q` must be a rational \"p/q\""))?)
        }
        "call" => {
            let f = o.get("f").and_then(Json::as_str).ok_or_else(|| shape(line, "field `f` must be a string"))?;
            Event::Call(f.to_string(), get_value(o, line)?)
        }
        "ret" => Event::Ret(get_value(o, line)?),
        "failact" => Event::FailAct,
        other => return Err(shape(line, format!("unknown event kind `{other}`"))),
    };
    Ok(Ok(e))
}

/// Encodes a trace as a JSON array (events followed by the terminal mark).
pub fn trace_to_json(t: &TracePrefix) -> Json {
    let mut items: Vec<Json> = t.events.iter().map(event_to_json).collect();
    items.push(end_to_json(&t.end));
    Json::Array(items)
}

pub fn trace_from_json(j: &Json) -> Result<TracePrefix, TraceJsonError> {
    let items = j.as_array().ok_or_else(|| shape(1, "a trace is an array of event objects"))?;
    let mut events = Vec::new();
    for (i, item) in items.iter().enumerate() {
        match item_from_json(item, i + 1)? {
            Ok(e) => events.push(e),
            Err(end) => {
                if i + 1 != items.len() {
                    return Err(TraceJsonError::TrailingContent { line: i + 2 });
                }
                return Ok(TracePrefix::new(events, end));
            }
        }
    }
    Err(TraceJsonError::MissingEnd)
}

pub fn trace_to_jsonl(t: &TracePrefix) -> String {
    let mut out = String::new();
    for e in &t.events {
        out.push_str(&event_to_json(e).to_string());
        out.push('\n');
    }
    out.push_str(&end_to_json(&t.end).to_string());
    out.push('\n');
    out
}

pub fn trace_from_jsonl(text: &str) -> Result<TracePrefix, TraceJsonError> {
    let mut events = Vec::new();
    let mut end = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        if end.is_some() {
            return Err(TraceJsonError::TrailingContent { line });
        }
        let j: Json = serde_json::from_str(raw).map_err(|e| TraceJsonError::Syntax { line, msg: e.to_string() })?;
        match item_from_json(&j, line)? {
            Ok(e) => events.push(e),
            Err(m) => end = Some(m),
        }
    }
    end.map(|end| TracePrefix::new(events, end)).ok_or(TraceJsonError::MissingEnd)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_format_matches_documented_shapes() {
        let t = TracePrefix::new(
            vec![
                Event::Read(5),
                Event::Out(Rational::new(3, 2)),
                Event::Call("f".into(), Value::Nat(2)),
                Event::Ret(Value::Bool(true)),
                Event::FailAct,
            ],
            TerminalMark::Truncated(1000),
        );
        let s = trace_to_jsonl(&t);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], r#"{"ev":"rd","n":5}"#);
        assert_eq!(lines[1], r#"{"ev":"out","q":"3/2"}"#);
        assert_eq!(lines[2], r#"{"ev":"call","f":"f","v":{"nat":2}}"#);
        assert_eq!(lines[3], r#"{"ev":"ret","v":{"bool":true}}"#);
        assert_eq!(lines[5], r#"{"end":"trunc","steps":1000}"#);
        assert_eq!(trace_from_jsonl(&s).unwrap(), t);
    }

    #[test]
    fn rejects_missing_end_and_trailing_events() {
        assert_eq!(trace_from_jsonl("{\"ev\":\"wr\",\"n\":3}\n"), Err(TraceJsonError::MissingEnd));
        assert!(matches!(
            trace_from_jsonl("{\"end\":\"open\"}\n{\"ev\":\"wr\",\"n\":3}\n"),
            Err(TraceJsonError::TrailingContent { line: 2 })
        ));
    }

    #[test]
    fn array_form_round_trips() {
        let t = TracePrefix::terminated(vec![Event::PubIn(-1), Event::PrivIn(9), Event::PubOut(1)]);
        assert_eq!(trace_from_json(&trace_to_json(&t)).unwrap(), t);
    }
}
