//! Report emission: JSON with a schema version and 17 significant digits,
//! or CSV for tabular results.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A computed result: the full report, plus the rows CSV output shows.
pub struct Report {
    pub command: &'static str,
    pub body: Value,
    pub table: Option<Vec<Value>>,
}

impl Report {
    pub fn new(command: &'static str, body: impl Serialize) -> Result<Self, String> {
        Ok(Self { command, body: serde_json::to_value(body).map_err(|e| e.to_string())?, table: None })
    }

    pub fn with_table(mut self, rows: Vec<Value>) -> Self {
        self.table = Some(rows);
        self
    }
}

/// A float with 17 significant digits, positional for moderate exponents.
pub fn fmt_f64(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    if !(-5..=16).contains(&exp) {
        return format!("{sign}{mantissa}e{exp}");
    }
    if exp < 0 {
        format!("{sign}0.{}{digits}", "0".repeat((-exp - 1) as usize))
    } else {
        let point = exp as usize + 1;
        if point >= digits.len() {
            format!("{sign}{digits}{}.0", "0".repeat(point - digits.len()))
        } else {
            format!("{sign}{}.{}", &digits[..point], &digits[point..])
        }
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => out.push_str(&i.to_string()),
            (None, Some(u)) => out.push_str(&u.to_string()),
            _ => out.push_str(&fmt_f64(n.as_f64().unwrap_or(f64::NAN))),
        },
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Value::Array(items) => {
            // short rows of scalars stay on one line
            if items.iter().all(|x| !x.is_array() && !x.is_object()) {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(k).expect("key"));
                out.push_str(": ");
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

pub fn to_json(report: &Report) -> String {
    let mut root = Map::new();
    root.insert("schema_version".into(), Value::String(SCHEMA_VERSION.into()));
    root.insert("command".into(), Value::String(report.command.into()));
    root.insert("report".into(), report.body.clone());
    let mut out = String::new();
    write_value(&mut out, &Value::Object(root), 0);
    out.push('\n');
    out
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(_) | Value::Bool(_) => {
            let mut s = String::new();
            write_value(&mut s, v, 0);
            s
        }
        other => {
            let mut s = String::new();
            write_value(&mut s, other, 0);
            s.replace('\n', " ")
        }
    }
}

pub fn to_csv(report: &Report) -> Result<String, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| e.to_string();
    match &report.table {
        Some(rows) if !rows.is_empty() => {
            let header: Vec<String> = match &rows[0] {
                Value::Object(m) => m.keys().cloned().collect(),
                _ => vec!["value".into()],
            };
            w.write_record(&header).map_err(err)?;
            for r in rows {
                let rec: Vec<String> = match r {
                    Value::Object(m) => header.iter().map(|k| m.get(k).map(cell).unwrap_or_default()).collect(),
                    other => vec![cell(other)],
                };
                w.write_record(&rec).map_err(err)?;
            }
        }
        _ => {
            w.write_record(["field", "value"]).map_err(err)?;
            w.write_record(["schema_version", SCHEMA_VERSION]).map_err(err)?;
            if let Value::Object(m) = &report.body {
                for (k, v) in m {
                    w.write_record([k.as_str(), &cell(v)]).map_err(err)?;
                }
            }
        }
    }
    String::from_utf8(w.into_inner().map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

pub fn write_report(report: &Report, format: Format, path: Option<&Path>) -> Result<(), String> {
    let text = match format {
        Format::Json => to_json(report),
        Format::Csv => to_csv(report)?,
    };
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| e.to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(256.0), "256.00000000000000");
        assert_eq!(fmt_f64(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(fmt_f64(-2.5e-8), "-2.4999999999999999e-8");
        assert_eq!(fmt_f64(1.5e20), "1.5000000000000000e20");
        assert_eq!(fmt_f64(0.001), "0.0010000000000000000");
        for x in [0.1, 1.0 / 3.0, 123456.789, 6.02e23, -1e-300] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_has_schema_and_order() {
        let r = Report::new("demo", serde_json::json!({"b": 1.5, "a": [1, 2]})).unwrap();
        let text = to_json(&r);
        assert!(text.starts_with("{\n  \"schema_version\": \"1\""));
        assert!(text.find("\"b\"").unwrap() < text.find("\"a\"").unwrap());
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["report"]["b"], 1.5);
    }

    #[test]
    fn csv_table() {
        let rows = vec![serde_json::json!({"k": 1, "re": 0.5}), serde_json::json!({"k": -1, "re": 0.25})];
        let r = Report::new("demo", serde_json::json!({})).unwrap().with_table(rows);
        assert_eq!(to_csv(&r).unwrap(), "k,re\n1,0.50000000000000000\n-1,0.25000000000000000\n");
    }
}
