//! Run manifests and tabular encodings of results.
//!
//! Any serde-serializable result can be written as CSV: nested objects are
//! flattened into dotted column names (`diagnostics.max_u_final`), arrays use
//! their index as a path segment (`zone_i.0`), and `null` becomes an empty
//! cell. [`from_csv`] reverses the mapping.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kinetics::Params;
use crate::pde::SimConfig;

pub const TOOL_NAME: &str = "predwave";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Record of one command invocation, sufficient to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Fully resolved arguments, in flag form, excluding output location.
    pub args: Vec<String>,
    pub params: Option<Params>,
    pub sim: Option<SimConfig>,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
    /// SHA-256 of the final simulated field, when the command simulates.
    pub determinism_hash: Option<String>,
    /// SHA-256 of each output file, keyed by file name.
    pub output_hashes: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, args: Vec<String>) -> Self {
        RunManifest {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            args,
            params: None,
            sim: None,
            wall_time_s: 0.0,
            outputs: Vec::new(),
            determinism_hash: None,
            output_hashes: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("manifest: {e}")))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, Value)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), v, out);
            }
        }
        other => out.push((prefix.to_string(), other.clone())),
    }
}

fn cell(value: &Value) -> Result<String> {
    Ok(match value {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:.16e}"),
            _ => n.to_string(),
        },
        Value::String(s) => {
            if s.is_empty() || s.parse::<f64>().is_ok() || s == "true" || s == "false" {
                return Err(Error::Config(format!("string `{s}` is not representable in CSV")));
            }
            s.clone()
        }
        Value::Array(_) | Value::Object(_) => unreachable!("flattened"),
    })
}

/// Writes `rows` as CSV with one column per leaf field.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut header: Vec<String> = Vec::new();
    let mut flat_rows = Vec::with_capacity(rows.len());
    for row in rows {
        let value = serde_json::to_value(row).map_err(|e| Error::Config(e.to_string()))?;
        let mut flat = Vec::new();
        flatten("", &value, &mut flat);
        for (k, _) in &flat {
            if !header.contains(k) {
                header.push(k.clone());
            }
        }
        flat_rows.push(flat);
    }
    let err = |e: csv::Error| Error::Config(format!("CSV: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(err)?;
    for flat in flat_rows {
        let mut cells = vec![String::new(); header.len()];
        for (k, v) in flat {
            let i = header.iter().position(|h| *h == k).expect("collected above");
            cells[i] = cell(&v)?;
        }
        w.write_record(&cells).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
}

fn parse_cell(s: &str) -> Value {
    if s.is_empty() {
        return Value::Null;
    }
    if let Ok(b) = s.parse::<bool>() {
        return Value::Bool(b);
    }
    if let Ok(i) = s.parse::<i64>() {
        return Value::Number(i.into());
    }
    if let Ok(x) = s.parse::<f64>() {
        if let Some(n) = Number::from_f64(x) {
            return Value::Number(n);
        }
    }
    Value::String(s.to_string())
}

fn insert(root: &mut Map<String, Value>, path: &[&str], value: Value) {
    let (head, rest) = path.split_first().expect("non-empty path");
    if rest.is_empty() {
        root.insert(head.to_string(), value);
        return;
    }
    let child = root
        .entry(head.to_string())
        .or_insert_with(|| Value::Object(Map::new()));
    if let Value::Object(m) = child {
        insert(m, rest, value);
    }
}

/// Objects whose keys are exactly `0..n` become arrays.
fn arrays(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let indexed = !map.is_empty()
                && (0..map.len()).all(|i| map.contains_key(&i.to_string()));
            if indexed {
                let mut map = map;
                Value::Array(
                    (0..map.len())
                        .map(|i| arrays(map.remove(&i.to_string()).expect("checked")))
                        .collect(),
                )
            } else {
                Value::Object(map.into_iter().map(|(k, v)| (k, arrays(v))).collect())
            }
        }
        other => other,
    }
}

/// Parses CSV written by [`to_csv`].
pub fn from_csv<T: DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    let err = |e: csv::Error| Error::Config(format!("CSV: {e}"));
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().map_err(err)?.iter().map(String::from).collect();
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(err)?;
        let mut root = Map::new();
        for (k, c) in header.iter().zip(rec.iter()) {
            let v = parse_cell(c);
            if !v.is_null() {
                insert(&mut root, &k.split('.').collect::<Vec<_>>(), v);
            }
        }
        let value = arrays(Value::Object(root));
        out.push(
            serde_json::from_value(value)
                .map_err(|e| Error::Config(format!("CSV row {}: {e}", line + 2)))?,
        );
    }
    Ok(out)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("JSON: {e}")))
}
