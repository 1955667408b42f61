use serde_json::{json, Map, Value};

use crate::CliConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Plain,
    Json,
}

/// One command's result: a named quantity plus the parameters that produced it.
pub struct Report {
    fields: Vec<(&'static str, Value)>,
    /// Preformatted lines appended to plain output only.
    plain_tail: Vec<String>,
}

impl Report {
    pub fn new(quantity: &str, value: Value, config: &CliConfig) -> Self {
        Self {
            fields: vec![
                ("quantity", json!(quantity)),
                ("value", value),
                ("k", json!(config.k)),
                ("base", json!(config.base)),
                ("epsilon", json!(config.epsilon)),
                ("equality_tol", json!(config.equality_tol)),
            ],
            plain_tail: Vec::new(),
        }
    }

    pub fn field(mut self, key: &'static str, value: Value) -> Self {
        if let Some(slot) = self.fields.iter_mut().find(|(k, _)| *k == key) {
            slot.1 = value;
        } else {
            self.fields.push((key, value));
        }
        self
    }

    pub fn plain_line(mut self, line: String) -> Self {
        self.plain_tail.push(line);
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let map: Map<String, Value> = self
                    .fields
                    .iter()
                    .map(|(k, v)| ((*k).to_owned(), v.clone()))
                    .collect();
                Value::Object(map).to_string()
            }
            Format::Plain => {
                let mut out: Vec<String> = self
                    .fields
                    .iter()
                    .filter(|(_, v)| !v.is_array() && !v.is_object())
                    .map(|(k, v)| format!("{k}: {}", plain(v)))
                    .collect();
                out.extend(self.plain_tail.iter().cloned());
                out.join("\n")
            }
        }
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => fmt_f64(f),
            _ => n.to_string(),
        },
        Value::Null => "inf".to_owned(),
        other => other.to_string(),
    }
}

/// Shortest representation that round-trips, matching the JSON digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:?}")
}

/// JSON has no infinity; encode it as the string "inf".
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x > 0.0 {
        json!("inf")
    } else if x < 0.0 {
        json!("-inf")
    } else {
        json!("nan")
    }
}
