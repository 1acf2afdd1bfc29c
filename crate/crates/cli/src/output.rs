//! Output formatting: pretty JSON, flat `key = value` text, or a
//! two-line CSV (header + row). Text and CSV flatten nested objects with
//! dotted keys and join arrays with ';'.

use clap::ValueEnum;
use serde_json::Value;

#[derive(ValueEnum, Clone, Copy)]
pub enum Format {
    Json,
    Text,
    Csv,
}

pub fn print_value(value: &Value, format: Format) {
    match format {
        Format::Json => {
            println!("{}", serde_json::to_string_pretty(value).expect("valid JSON value"));
        }
        Format::Text => {
            for (key, val) in flatten(value) {
                println!("{key} = {val}");
            }
        }
        Format::Csv => {
            let pairs = flatten(value);
            let header: Vec<&str> = pairs.iter().map(|(k, _)| k.as_str()).collect();
            let row: Vec<&str> = pairs.iter().map(|(_, v)| v.as_str()).collect();
            println!("{}", header.join(","));
            println!("{}", row.join(","));
        }
    }
}

fn flatten(value: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    walk(value, String::new(), &mut out);
    out
}

fn walk(value: &Value, prefix: String, out: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                walk(v, key, out);
            }
        }
        Value::Array(items) => {
            let joined: Vec<String> = items.iter().map(scalar_string).collect();
            out.push((prefix, joined.join(";")));
        }
        other => out.push((prefix, scalar_string(other))),
    }
}

fn scalar_string(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
