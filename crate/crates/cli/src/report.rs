//! Reports: one JSON document per run, and a text rendering of the same values.

use std::fmt::Write;

use serde_json::{json, Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    /// Informational output, no check attached.
    Info,
    Pass,
    Fail,
    /// The task stopped on a hard error.
    Error,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Info => "info",
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Record {
    pub datum: String,
    pub pi: Option<String>,
    pub task: String,
    pub status: Status,
    pub result: Map<String, Value>,
    pub witnesses: Vec<String>,
    /// Seconds.
    pub elapsed: f64,
}

impl Record {
    pub fn to_json(&self) -> Value {
        let mut result = self.result.clone();
        result.insert("status".into(), self.status.name().into());
        json!({
            "datum": self.datum,
            "pi": self.pi,
            "task": self.task,
            "result": result,
            "witnesses": self.witnesses,
            "elapsed": (self.elapsed * 1e3).round() / 1e3,
        })
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub records: Vec<Record>,
}

impl Report {
    /// Worst record status; an empty report passes.
    pub fn status(&self) -> Status {
        self.records
            .iter()
            .map(|r| r.status)
            .max()
            .unwrap_or(Status::Pass)
            .max(Status::Pass)
    }

    /// 0 when every check passes, 1 on a failed check, 3 on a hard error.
    pub fn exit_code(&self) -> i32 {
        match self.status() {
            Status::Info | Status::Pass => 0,
            Status::Fail => 1,
            Status::Error => 3,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "records": self.records.iter().map(Record::to_json).collect::<Vec<_>>(),
            "status": self.status().name(),
        })
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        s.push('\n');
        s
    }

    /// Text rendering of [`Report::to_json`].
    pub fn to_human(&self) -> String {
        render_human(&self.to_json())
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn render_value(out: &mut String, key: &str, v: &Value, indent: usize) {
    let pad = " ".repeat(indent);
    match v {
        Value::Object(m) => {
            let _ = writeln!(out, "{pad}{key}:");
            for (k, x) in m {
                render_value(out, k, x, indent + 2);
            }
        }
        Value::Array(xs) if xs.iter().any(|x| x.is_object() || x.is_array()) => {
            let _ = writeln!(out, "{pad}{key}:");
            for x in xs {
                match x {
                    Value::Object(m) => {
                        let parts: Vec<String> = m
                            .iter()
                            .map(|(k, y)| format!("{k}={}", compact(y)))
                            .collect();
                        let _ = writeln!(out, "{pad}  - {}", parts.join(" "));
                    }
                    other => {
                        let _ = writeln!(out, "{pad}  - {}", compact(other));
                    }
                }
            }
        }
        Value::Array(_) => {
            let _ = writeln!(out, "{pad}{key}: {}", compact(v));
        }
        other => {
            let _ = writeln!(out, "{pad}{key}: {}", scalar(other));
        }
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(xs) => format!(
            "[{}]",
            xs.iter().map(compact).collect::<Vec<_>>().join(", ")
        ),
        other => other.to_string(),
    }
}

/// Renders a report document as indented text: one header line per record,
/// then its result fields and witnesses.
pub fn render_human(doc: &Value) -> String {
    let mut out = String::new();
    let records = doc["records"].as_array().cloned().unwrap_or_default();
    for r in &records {
        let status = r["result"]["status"].as_str().unwrap_or("?");
        let _ = writeln!(
            out,
            "[{status}] {} {} {} ({}s)",
            r["task"].as_str().unwrap_or("?"),
            scalar(&r["datum"]),
            scalar(&r["pi"]),
            scalar(&r["elapsed"])
        );
        if let Some(m) = r["result"].as_object() {
            for (k, v) in m.iter().filter(|(k, _)| k.as_str() != "status") {
                render_value(&mut out, k, v, 2);
            }
        }
        for w in r["witnesses"].as_array().into_iter().flatten() {
            let _ = writeln!(out, "  ! {}", scalar(w));
        }
    }
    let _ = writeln!(
        out,
        "status: {} ({} records)",
        scalar(&doc["status"]),
        records.len()
    );
    out
}

/// A report document with every `elapsed` field removed.
pub fn strip_timings(doc: &Value) -> Value {
    match doc {
        Value::Object(m) => Value::Object(
            m.iter()
                .filter(|(k, _)| k.as_str() != "elapsed")
                .map(|(k, v)| (k.clone(), strip_timings(v)))
                .collect(),
        ),
        Value::Array(xs) => Value::Array(xs.iter().map(strip_timings).collect()),
        other => other.clone(),
    }
}
