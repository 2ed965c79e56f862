//! In-memory result tables and their CSV form.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{LabError, LabResult};

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Float(x) => Some(*x),
            Value::Text(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as i64)
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Value::Int(x as i64)
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Int(x as i64)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

/// Floats are written with 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn render(v: &Value) -> String {
    match v {
        Value::Int(i) => i.to_string(),
        Value::Float(x) => format_float(*x),
        Value::Text(s) => s.clone(),
    }
}

/// One CSV file: `suffix` is appended to the output stem (empty for the
/// main table).
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub suffix: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(suffix: &str, columns: &[&str]) -> Self {
        Table {
            suffix: suffix.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width for {}", self.suffix);
        self.rows.push(row);
    }

    pub fn index(&self, column: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == column)
    }

    /// Numeric column by name; panics on a missing or text column.
    pub fn f64s(&self, column: &str) -> Vec<f64> {
        let i = self.index(column).unwrap_or_else(|| panic!("no column `{column}`"));
        self.rows
            .iter()
            .map(|r| r[i].as_f64().unwrap_or_else(|| panic!("`{column}` is not numeric")))
            .collect()
    }

    /// Rows whose `column` equals `value` (numerically or as text).
    pub fn filter(&self, column: &str, value: impl Into<Value>) -> Table {
        let i = self.index(column).unwrap_or_else(|| panic!("no column `{column}`"));
        let v = value.into();
        let keep = |c: &Value| match (&v, c) {
            (Value::Text(a), Value::Text(b)) => a == b,
            _ => v.as_f64().zip(c.as_f64()).is_some_and(|(a, b)| a == b),
        };
        Table {
            suffix: self.suffix.clone(),
            columns: self.columns.clone(),
            rows: self.rows.iter().filter(|r| keep(&r[i])).cloned().collect(),
        }
    }

    /// Header row plus data rows, without provenance.
    pub fn body(&self) -> LabResult<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(render))?;
        }
        w.into_inner().map_err(|e| LabError::Io(e.into_error()))
    }

    /// Writes `# `-prefixed provenance lines followed by the body.
    pub fn write(&self, dir: &Path, stem: &str, provenance: &str) -> LabResult<PathBuf> {
        fs::create_dir_all(dir)?;
        let name = if self.suffix.is_empty() {
            format!("{stem}.csv")
        } else {
            format!("{stem}_{}.csv", self.suffix)
        };
        let path = dir.join(name);
        let mut f = fs::File::create(&path)?;
        for line in provenance.lines() {
            writeln!(f, "# {line}")?;
        }
        f.write_all(&self.body()?)?;
        Ok(path)
    }
}

/// Strips the provenance lines from a written file.
pub fn strip_provenance(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}
