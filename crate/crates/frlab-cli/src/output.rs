//! Report emission: JSON with sorted keys and 12-significant-digit numbers,
//! or CSV with the run provenance in leading comment lines.

use std::collections::BTreeMap;

use serde_json::Value;

/// Rounds to 12 significant digits so reports are stable, readable decimals.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Formats a float for CSV at the same precision the JSON carries.
pub fn fmt_sig12(x: f64) -> String {
    format!("{}", round_sig12(x))
}

pub fn round_json_numbers(value: &mut Value) {
    match value {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(x) = n.as_f64() {
                    if let Some(rounded) = serde_json::Number::from_f64(round_sig12(x)) {
                        *n = rounded;
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json_numbers),
        Value::Object(map) => map.values_mut().for_each(round_json_numbers),
        _ => {}
    }
}

pub struct RunMeta {
    pub command: String,
    pub seed: u64,
    pub budget: u64,
    pub config: BTreeMap<String, String>,
}

pub fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// The complete JSON document for one run.
pub fn json_document(meta: &RunMeta, report: Value, pass: bool) -> String {
    let mut report = report;
    round_json_numbers(&mut report);
    let doc = serde_json::json!({
        "command": meta.command,
        "version": version(),
        "seed": meta.seed,
        "budget": meta.budget,
        "config": meta.config,
        "pass": pass,
        "report": report,
    });
    // serde_json maps iterate sorted, so the rendering is deterministic
    let mut text = serde_json::to_string_pretty(&doc).expect("report serialises");
    text.push('\n');
    text
}

/// A CSV document: provenance comments, then a header row and data rows.
pub fn csv_document(meta: &RunMeta, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# version={}\n", version()));
    out.push_str(&format!("# seed={}\n", meta.seed));
    out.push_str(&format!("# budget={}\n", meta.budget));
    let config_line = meta
        .config
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";");
    out.push_str(&format!("# config: {config_line}\n"));
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Flattens an arbitrary JSON report into `key,value` rows for commands
/// without a natural table shape.
pub fn flatten_rows(value: &Value) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    let mut value = value.clone();
    round_json_numbers(&mut value);
    flatten_into("", &value, &mut rows);
    rows
}

fn flatten_into(prefix: &str, value: &Value, rows: &mut Vec<Vec<String>>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten_into(&key, v, rows);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten_into(&format!("{prefix}[{i}]"), v, rows);
            }
        }
        other => {
            let rendered = match other {
                Value::String(s) => s.clone(),
                v => v.to_string(),
            };
            rows.push(vec![prefix.to_string(), rendered]);
        }
    }
}
