//! Rendering of command results as CSV, markdown or JSON.
//!
//! A report is a list of sections; each section is a table or a list of
//! notes. Numbers are printed with a fixed number of significant digits in
//! every format, so the three renderings of one result agree.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde_json::{Map, Value as Json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Markdown,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Str(String),
    Num(f64),
    Int(i64),
    Missing,
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Str(s)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as i64)
    }
}

impl From<u32> for Value {
    fn from(x: u32) -> Self {
        Value::Int(i64::from(x))
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        // Seeds can exceed i64; keep them exact as text.
        i64::try_from(x).map_or_else(|_| Value::Str(x.to_string()), Value::Int)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(x: Option<T>) -> Self {
        x.map_or(Value::Missing, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub value: Value,
    /// Highlighted in markdown (bold); other formats carry the flag in a
    /// separate section where it matters.
    pub bold: bool,
}

impl<T: Into<Value>> From<T> for Cell {
    fn from(v: T) -> Self {
        Cell {
            value: v.into(),
            bold: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Table {
        headers: Vec<String>,
        rows: Vec<Vec<Cell>>,
    },
    Notes(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub body: Body,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub sections: Vec<Section>,
}

impl Report {
    pub fn table(&mut self, name: &str, headers: &[&str], rows: Vec<Vec<Cell>>) {
        self.sections.push(Section {
            name: name.into(),
            body: Body::Table {
                headers: headers.iter().map(|h| h.to_string()).collect(),
                rows,
            },
        });
    }

    pub fn table_owned(&mut self, name: &str, headers: Vec<String>, rows: Vec<Vec<Cell>>) {
        self.sections.push(Section {
            name: name.into(),
            body: Body::Table { headers, rows },
        });
    }

    pub fn notes(&mut self, name: &str, notes: Vec<String>) {
        self.sections.push(Section {
            name: name.into(),
            body: Body::Notes(notes),
        });
    }

    pub fn render(&self, format: Format, digits: usize) -> String {
        match format {
            Format::Csv => self.render_csv(digits),
            Format::Markdown => self.render_markdown(digits),
            Format::Json => {
                let mut s =
                    serde_json::to_string_pretty(&self.to_json(digits)).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }

    fn render_csv(&self, digits: usize) -> String {
        let mut out = String::new();
        let tables = self
            .sections
            .iter()
            .filter(|s| matches!(s.body, Body::Table { .. }))
            .count();
        for s in &self.sections {
            match &s.body {
                Body::Notes(notes) => {
                    for n in notes {
                        writeln!(out, "# {n}").unwrap();
                    }
                }
                Body::Table { headers, rows } => {
                    if tables > 1 {
                        writeln!(out, "# [{}]", s.name).unwrap();
                    }
                    writeln!(
                        out,
                        "{}",
                        headers
                            .iter()
                            .map(|h| csv_field(h))
                            .collect::<Vec<_>>()
                            .join(",")
                    )
                    .unwrap();
                    for row in rows {
                        let fields: Vec<String> = row
                            .iter()
                            .map(|c| csv_field(&plain(&c.value, digits)))
                            .collect();
                        writeln!(out, "{}", fields.join(",")).unwrap();
                    }
                }
            }
        }
        out
    }

    fn render_markdown(&self, digits: usize) -> String {
        let mut out = String::new();
        for (i, s) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            writeln!(out, "## {}\n", s.name).unwrap();
            match &s.body {
                Body::Notes(notes) => {
                    for n in notes {
                        writeln!(out, "{n}  ").unwrap();
                    }
                }
                Body::Table { headers, rows } => {
                    writeln!(out, "| {} |", headers.join(" | ")).unwrap();
                    writeln!(out, "|{}", "---|".repeat(headers.len())).unwrap();
                    for row in rows {
                        let cells: Vec<String> = row
                            .iter()
                            .map(|c| {
                                let v = match c.value {
                                    Value::Missing => "-".to_string(),
                                    ref v => plain(v, digits),
                                };
                                if c.bold {
                                    format!("**{v}**")
                                } else {
                                    v
                                }
                            })
                            .collect();
                        writeln!(out, "| {} |", cells.join(" | ")).unwrap();
                    }
                }
            }
        }
        out
    }

    /// One key per section in report order; tables become arrays of
    /// objects whose keys follow the column order.
    pub fn to_json(&self, digits: usize) -> Json {
        let mut root = Map::new();
        for s in &self.sections {
            let v = match &s.body {
                Body::Notes(notes) => {
                    Json::Array(notes.iter().map(|n| Json::String(n.clone())).collect())
                }
                Body::Table { headers, rows } => Json::Array(
                    rows.iter()
                        .map(|row| {
                            let obj: Map<String, Json> = headers
                                .iter()
                                .zip(row)
                                .map(|(h, c)| (h.clone(), json_value(&c.value, digits)))
                                .collect();
                            Json::Object(obj)
                        })
                        .collect(),
                ),
            };
            root.insert(s.name.clone(), v);
        }
        Json::Object(root)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn plain(v: &Value, digits: usize) -> String {
    match v {
        Value::Str(s) => s.clone(),
        Value::Num(x) => format_sig(*x, digits),
        Value::Int(i) => i.to_string(),
        Value::Missing => String::new(),
    }
}

fn json_value(v: &Value, digits: usize) -> Json {
    match v {
        Value::Str(s) => Json::String(s.clone()),
        Value::Int(i) => Json::from(*i),
        Value::Num(x) if x.is_finite() => {
            let r: f64 = format_sig(*x, digits)
                .parse()
                .expect("formatted number parses");
            serde_json::Number::from_f64(r).map_or(Json::Null, Json::Number)
        }
        Value::Num(_) | Value::Missing => Json::Null,
    }
}

/// Formats `x` with at most `digits` significant digits, without trailing
/// zeros and without exponent for magnitudes in [1e-5, 1e15).
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let rounded: f64 = sci.parse().expect("scientific form parses");
    let exp = rounded.abs().log10().floor() as i32;
    if !(-5..15).contains(&exp) {
        let (mantissa, e) = sci.split_once('e').expect("exponent present");
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{e}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{rounded:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
