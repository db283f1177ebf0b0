//! Rounded JSON/CSV output to stdout or a file.

use std::io::Write;
use std::path::Path;

use nonlocal_lab::format::{fmt12, round_sig};
use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

/// Rounds every number in a JSON tree to 12 significant digits.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().expect("f64 number"), 12);
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

pub fn json_string(value: &impl Serialize) -> String {
    let v = serde_json::to_value(value).expect("serializable");
    serde_json::to_string_pretty(&round_json(v)).expect("serializable") + "\n"
}

/// Writes `text` to `out`, or stdout when `out` is `None`.
pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) => n.as_f64().map_or_else(|| n.to_string(), fmt12),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Serializes flat records as CSV text, numbers at 12 significant digits.
/// The header comes from the first record's field order.
pub fn csv_string<R: Serialize>(records: impl IntoIterator<Item = R>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header_written = false;
    for r in records {
        let Value::Object(map) = serde_json::to_value(r).expect("serializable") else {
            return Err(CliError::Usage("CSV output needs flat records".into()));
        };
        if !header_written {
            w.write_record(map.keys())?;
            header_written = true;
        }
        w.write_record(map.values().map(csv_cell))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}
