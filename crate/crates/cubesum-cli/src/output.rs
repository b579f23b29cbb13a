use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Column-oriented rows, written as the CSV body or as `columns`/`rows` in JSON.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub params: Value,
    pub results: Value,
    pub table: Option<Table>,
    pub tolerances: Value,
    pub guards: Value,
}

impl Report {
    pub fn new(command: &'static str, params: Value) -> Self {
        Report {
            command,
            params,
            results: Value::Object(Map::new()),
            table: None,
            tolerances: Value::Object(Map::new()),
            guards: Value::Object(Map::new()),
        }
    }
}

/// Exact integer as a JSON number, however large.
pub fn exact(x: impl ToString) -> Value {
    x.to_string()
        .parse::<Number>()
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// `x` rounded to ten significant digits.
pub fn sig10(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.9e}").parse().unwrap_or(x)
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                *v = Number::from_f64(sig10(x)).map_or(Value::Null, Value::Number);
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_floats),
        Value::Object(o) => o.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(o) => {
            for (k, x) in o {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, x, out);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object()) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, out);
            }
        }
        _ => out.push((prefix.to_string(), cell(v))),
    }
}

pub fn render(report: &Report, format: Format, runtime_ms: Option<u128>) -> io::Result<Vec<u8>> {
    let mut results = report.results.clone();
    if let (Some(t), Value::Object(o)) = (&report.table, &mut results) {
        o.insert("columns".into(), json!(t.columns));
        o.insert("rows".into(), Value::Array(t.rows.iter().map(|r| Value::Array(r.clone())).collect()));
    }
    let mut doc = json!({
        "command": report.command,
        "params": report.params,
        "results": results,
        "diagnostics": {
            "tolerances": report.tolerances,
            "guards": report.guards,
            "runtime_ms": runtime_ms.map(exact),
        },
    });
    round_floats(&mut doc);
    match format {
        Format::Json => {
            let mut buf = serde_json::to_vec_pretty(&doc)?;
            buf.push(b'\n');
            Ok(buf)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            match &report.table {
                Some(t) => {
                    w.write_record(&t.columns)?;
                    for row in &doc["results"]["rows"].as_array().cloned().unwrap_or_default() {
                        let cells: Vec<String> = row.as_array().map(|r| r.iter().map(cell).collect()).unwrap_or_default();
                        w.write_record(&cells)?;
                    }
                }
                None => {
                    w.write_record(["field", "value"])?;
                    let mut pairs = Vec::new();
                    flatten("", &doc["results"], &mut pairs);
                    for (k, v) in pairs {
                        w.write_record([k, v])?;
                    }
                }
            }
            w.into_inner().map_err(|e| e.into_error())
        }
    }
}

/// Relative paths land under `CUBESUM_OUTPUT_DIR` when it is set.
pub fn resolve(path: &Path) -> PathBuf {
    match std::env::var_os("CUBESUM_OUTPUT_DIR") {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

pub fn emit(bytes: &[u8], output: Option<&Path>) -> io::Result<()> {
    match output {
        Some(p) => {
            let p = resolve(p);
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, bytes)
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::excessive_precision)]
    fn ten_significant_digits() {
        assert_eq!(sig10(0.30685281944005469), 0.3068528194);
        assert_eq!(sig10(123456789012345.0), 123456789000000.0);
        assert_eq!(sig10(-1.0 / 3.0), -0.3333333333);
    }

    #[test]
    fn large_counts_stay_exact() {
        let v = exact(u128::MAX);
        assert_eq!(v.to_string(), u128::MAX.to_string());
    }

    #[test]
    fn csv_table_and_fields() {
        let mut r = Report::new("demo", json!({}));
        let mut t = Table::new(&["n", "count"]);
        t.push(vec![json!(109), exact(6u128)]);
        r.table = Some(t);
        let out = String::from_utf8(render(&r, Format::Csv, None).unwrap()).unwrap();
        assert_eq!(out, "n,count\n109,6\n");

        let mut r = Report::new("demo", json!({}));
        r.results = json!({"a": {"b": 0.1234567890123}, "c": true});
        let out = String::from_utf8(render(&r, Format::Csv, None).unwrap()).unwrap();
        assert_eq!(out, "field,value\na.b,0.123456789\nc,true\n");
    }
}
