//! Canonical JSON, CSV rows and artifact files.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use aqec_core::analytics::format_g;
use aqec_core::{RNG_ALGORITHM, VERSION};

use crate::CliError;

/// Sorted-key JSON with a trailing newline.
pub fn canonical<T: Serialize>(value: &T) -> Result<String, CliError> {
    let v = serde_json::to_value(value).map_err(|e| CliError::Internal(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| CliError::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Provenance block embedded in every artifact.
pub fn envelope(command: &str, config: &Value, seed: u64, wall_time_s: f64) -> Value {
    json!({
        "tool": "aqec-lab",
        "version": VERSION,
        "command": command,
        "config": config,
        "seed": seed,
        "rng_algorithm": RNG_ALGORITHM,
        "wall_time_s": wall_time_s,
    })
}

/// `%.12g` cell, or the raw text for non-numbers.
pub fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format_g(x, 12),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Header plus one line per record, columns in `columns` order.
pub fn csv(columns: &[&str], records: &[Value]) -> String {
    let mut out = columns.join(",");
    out.push('\n');
    for r in records {
        let cells: Vec<String> = columns.iter().map(|c| cell(&r[*c])).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Writes `body` to `path` or standard output; `meta` goes to a sidecar
/// file next to `path` when given.
pub fn emit(body: &str, path: Option<&Path>, meta: Option<&Value>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, body).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            if let Some(m) = meta {
                let side = sidecar_path(p);
                std::fs::write(&side, canonical(m)?)
                    .map_err(|e| CliError::Io(format!("{}: {e}", side.display())))?;
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_json_sorts_keys() {
        let s = canonical(&json!({"b": 1, "a": {"d": 2, "c": 3}})).unwrap();
        let a = s.find("\"a\"").unwrap();
        let b = s.find("\"b\"").unwrap();
        let c = s.find("\"c\"").unwrap();
        let d = s.find("\"d\"").unwrap();
        assert!(a < b && c < d);
    }

    #[test]
    fn csv_cells_use_twelve_significant_digits() {
        let rows = [json!({"x": 1.0 / 3.0, "n": 7, "s": "double-layer"})];
        assert_eq!(
            csv(&["x", "n", "s"], &rows),
            "x,n,s\n0.333333333333,7,double-layer\n"
        );
    }
}
