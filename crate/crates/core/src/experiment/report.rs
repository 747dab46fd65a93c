//! Reads a finished run directory back and renders it for the terminal.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;

use super::RunError;

/// Loads `summary.json` from a run directory.
pub fn load_summary(dir: impl AsRef<Path>) -> Result<Value, RunError> {
    let path = dir.as_ref().join("summary.json");
    let text = std::fs::read_to_string(&path).map_err(|source| RunError::Io {
        path: path.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| RunError::Io {
        path,
        source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
    })
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Number(n) => Some(match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:.6e}"),
            _ => n.to_string(),
        }),
        Value::String(s) => Some(s.clone()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Null => Some("n/a".into()),
        _ => None,
    }
}

/// Prints every scalar under `v`, one dotted path per line. Arrays longer than
/// `max_items` are truncated.
fn flatten(prefix: &str, v: &Value, max_items: usize, out: &mut String) {
    if let Some(s) = scalar(v) {
        let _ = writeln!(out, "  {prefix:<44} {s}");
        return;
    }
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let p = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&p, x, max_items, out);
            }
        }
        Value::Array(a) => {
            if a.iter().all(|x| matches!(x, Value::Number(_))) && a.len() <= 8 {
                let parts: Vec<String> = a.iter().filter_map(scalar).collect();
                let _ = writeln!(out, "  {prefix:<44} [{}]", parts.join(", "));
                return;
            }
            for (i, x) in a.iter().take(max_items).enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, max_items, out);
            }
            if a.len() > max_items {
                let _ = writeln!(out, "  {prefix:<44} ... {} more", a.len() - max_items);
            }
        }
        _ => {}
    }
}

/// Human-readable rendering of a run directory's summary.
pub fn render_report(dir: impl AsRef<Path>) -> Result<String, RunError> {
    let summary = load_summary(&dir)?;
    let mut out = String::new();
    let task = summary.get("task").and_then(Value::as_str).unwrap_or("unknown");
    let _ = writeln!(out, "run: {}  task: {task}", dir.as_ref().display());
    if let Some(Value::Array(rows)) = summary.get("rows") {
        let _ = writeln!(out, "  {:<16} {:<58} {:>12}  quoted", "task", "comparison", "speedup");
        for r in rows {
            let _ = writeln!(
                out,
                "  {:<16} {:<58} {:>12.4e}  {}",
                r["task"].as_str().unwrap_or(""),
                r["label"].as_str().unwrap_or(""),
                r["speedup"].as_f64().unwrap_or(f64::NAN),
                r["quoted_speedup"].as_str().unwrap_or("")
            );
        }
        return Ok(out);
    }
    let mut rest = summary.clone();
    if let Value::Object(m) = &mut rest {
        m.remove("task");
        if let Some(Value::Array(w)) = m.get_mut("weights") {
            w.truncate(10);
        }
    }
    flatten("", &rest, 20, &mut out);
    Ok(out)
}
