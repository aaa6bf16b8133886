use std::fs;
use std::io::{self, Write};
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Float(f64),
    MaybeFloat(Option<f64>),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Field {
    fn csv(&self) -> String {
        match self {
            Field::Float(x) => fmt17(*x),
            Field::MaybeFloat(x) => x.map(fmt17).unwrap_or_default(),
            Field::Int(k) => k.to_string(),
            Field::Bool(b) => b.to_string(),
            Field::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Field::Float(x) => json_float(*x),
            Field::MaybeFloat(x) => x.map(json_float).unwrap_or(Value::Null),
            Field::Int(k) => Value::from(*k),
            Field::Bool(b) => Value::from(*b),
            Field::Text(s) => Value::from(s.as_str()),
        }
    }
}

fn json_float(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// 17 significant digits, positional between 1e-5 and 1e17, scientific outside.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.16e}");
    let mag: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("exponent digits");
    if (-5..17).contains(&mag) {
        let decimals = (16 - mag) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

/// Tabular result of one command: fixed columns, rows, and the configuration
/// that produced it.
pub struct Report {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Field>>,
    pub config: Value,
}

impl Report {
    pub fn to_csv(&self) -> io::Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Field::csv))?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> String {
        let records: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (k, f) in self.columns.iter().zip(row) {
                    obj.insert((*k).to_string(), f.json());
                }
                Value::Object(obj)
            })
            .collect();
        let mut top = Map::new();
        top.insert("config".into(), self.config.clone());
        top.insert("records".into(), Value::Array(records));
        let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("json values");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> io::Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => Ok(self.to_json()),
        }
    }
}

/// Writes to `path`, or stdout when `None`.
pub fn emit(text: &str, path: Option<&Path>) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}
