//! Tabular output in text, CSV and JSON-lines form.
//!
//! Every format begins with a version line: `# pauliprop <command> v1` for text
//! and CSV, `{"format":"pauliprop <command> v1"}` for JSON lines. Floating-point
//! values carry 12 significant digits.

use std::fmt::Write;

use clap::ValueEnum;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i128),
    Big(String),
    Str(String),
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as i128)
    }
}

impl From<u128> for Value {
    fn from(x: u128) -> Self {
        i128::try_from(x).map_or_else(|_| Value::Big(x.to_string()), Value::Int)
    }
}

impl From<i64> for Value {
    fn from(x: i64) -> Self {
        Value::Int(x as i128)
    }
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

/// `%.12g`-style rendering.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        return format!("{}e{}", trim_zeros(mantissa), exp);
    }
    trim_zeros(&format!("{:.*}", (11 - exp) as usize, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl Value {
    fn render(&self) -> String {
        match self {
            Value::Num(x) => fmt_num(*x),
            Value::Int(i) => i.to_string(),
            Value::Big(s) | Value::Str(s) => s.clone(),
        }
    }

    fn json(&self) -> String {
        match self {
            Value::Num(x) if x.is_finite() => fmt_num(*x),
            Value::Num(x) => format!("\"{}\"", fmt_num(*x)),
            Value::Int(i) => i.to_string(),
            Value::Big(s) => s.clone(),
            Value::Str(s) => serde_json::to_string(s).expect("strings serialize"),
        }
    }
}

/// A result table.
#[derive(Debug, Clone)]
pub struct Table {
    pub command: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    /// Columns shown in text mode; all when `None`.
    pub text_columns: Option<Vec<&'static str>>,
    /// Text mode omits the column header line.
    pub bare_text: bool,
}

impl Table {
    pub fn new(command: &'static str, columns: &[&'static str]) -> Self {
        Table { command, columns: columns.to_vec(), rows: Vec::new(), text_columns: None, bare_text: false }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Text => {
                let _ = writeln!(out, "# pauliprop {} v{FORMAT_VERSION}", self.command);
                let idx: Vec<usize> = match &self.text_columns {
                    None => (0..self.columns.len()).collect(),
                    Some(cols) => {
                        cols.iter().map(|c| self.columns.iter().position(|x| x == c).expect("known column")).collect()
                    }
                };
                if !self.bare_text {
                    let names: Vec<&str> = idx.iter().map(|&i| self.columns[i]).collect();
                    let _ = writeln!(out, "# {}", names.join(" "));
                }
                for row in &self.rows {
                    let cells: Vec<String> = idx.iter().map(|&i| row[i].render()).collect();
                    let _ = writeln!(out, "{}", cells.join(" "));
                }
            }
            Format::Csv => {
                let _ = writeln!(out, "# pauliprop {} v{FORMAT_VERSION}", self.command);
                let _ = writeln!(out, "{}", self.columns.join(","));
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(|v| csv_cell(&v.render())).collect();
                    let _ = writeln!(out, "{}", cells.join(","));
                }
            }
            Format::Jsonl => {
                let _ = writeln!(out, "{{\"format\":\"pauliprop {} v{FORMAT_VERSION}\"}}", self.command);
                for row in &self.rows {
                    let fields: Vec<String> =
                        self.columns.iter().zip(row).map(|(c, v)| format!("\"{c}\":{}", v.json())).collect();
                    let _ = writeln!(out, "{{{}}}", fields.join(","));
                }
            }
        }
        out
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
