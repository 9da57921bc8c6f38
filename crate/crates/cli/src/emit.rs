//! Report rendering. Field order follows the report structs; floats carry 17
//! significant digits so every value re-parses to the same `f64`.

use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Render any serializable report.
///
/// CSV: an array of objects becomes one row per element, anything else a
/// single row; nested objects flatten to dotted column names.
pub fn emit_report<T: Serialize + ?Sized>(report: &T, format: Format) -> Result<String, serde_json::Error> {
    let value = serde_json::to_value(report)?;
    Ok(match format {
        Format::Json => {
            let mut out = String::new();
            write_json(&value, &mut out);
            out.push('\n');
            out
        }
        Format::Csv => to_csv(&value),
    })
}

/// `%.17g`-style rendering that always reads back as a JSON float.
pub fn format_float(v: f64) -> String {
    if !v.is_finite() {
        return "null".into();
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let fixed = format!("{:.*}", (16 - exp) as usize, v);
        let trimmed = if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.')
        } else {
            &fixed
        };
        if trimmed.contains('.') {
            trimmed.to_string()
        } else {
            format!("{trimmed}.0")
        }
    } else {
        let m = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{m}e{exp}")
    }
}

fn write_json(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => out.push_str(&format_float(f)),
            _ => out.push_str(&n.to_string()),
        },
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_json(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_json(item, out);
            }
            out.push('}');
        }
    }
}

fn flatten(prefix: &str, v: &Value, row: &mut Map<String, Value>) {
    match v {
        Value::Object(map) => {
            for (k, item) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, item, row);
            }
        }
        other => {
            row.insert(prefix.to_string(), other.clone());
        }
    }
}

fn cell(v: &Value) -> String {
    let raw = match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_f64() => format_float(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(";"),
        other => {
            let mut s = String::new();
            write_json(other, &mut s);
            s
        }
    };
    if raw.contains([',', '"', '\n']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw
    }
}

fn to_csv(v: &Value) -> String {
    let rows: Vec<Map<String, Value>> = match v {
        Value::Array(items) if items.iter().all(Value::is_object) => items
            .iter()
            .map(|item| {
                let mut row = Map::new();
                flatten("", item, &mut row);
                row
            })
            .collect(),
        Value::Object(_) => {
            let mut row = Map::new();
            flatten("", v, &mut row);
            vec![row]
        }
        other => {
            let mut row = Map::new();
            row.insert("value".into(), other.clone());
            vec![row]
        }
    };
    let mut header: Vec<String> = Vec::new();
    for row in &rows {
        for k in row.keys() {
            if !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    let mut out = header.join(",");
    out.push('\n');
    for row in &rows {
        let cells: Vec<String> = header.iter().map(|k| row.get(k).map(cell).unwrap_or_default()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
