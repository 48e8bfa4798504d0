//! Canonical JSON: struct field order, floats with 17 significant digits.

use std::path::Path;

use serde::Serialize;
use serde_json::{Number, Value};

fn format_float(x: f64) -> Value {
    if !x.is_finite() {
        return Value::String(format!("{x}"));
    }
    Value::Number(format!("{x:.16e}").parse::<Number>().expect("valid number"))
}

fn canonicalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => format_float(n.as_f64().expect("float")),
        Value::Array(a) => Value::Array(a.into_iter().map(canonicalize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, canonicalize(v))).collect()),
        other => other,
    }
}

pub fn to_value<T: Serialize>(value: &T) -> serde_json::Result<Value> {
    Ok(canonicalize(serde_json::to_value(value)?))
}

pub fn to_string<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut s = serde_json::to_string_pretty(&to_value(value)?)?;
    s.push('\n');
    Ok(s)
}

/// Writes to `out`, or stdout when absent.
pub fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> anyhow::Result<()> {
    let text = to_string(value)?;
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
