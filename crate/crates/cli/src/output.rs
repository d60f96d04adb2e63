use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(if v { "pass" } else { "fail" }.into())
    }
}

impl Cell {
    /// Shortest round-trip text; non-finite floats become empty fields.
    fn text(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(f) if f.is_finite() => format!("{f:e}"),
            Cell::Float(_) => String::new(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Float(f) if f.is_finite() => json!(f),
            Cell::Float(_) => Value::Null,
            Cell::Text(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(CliError::io)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::text)).map_err(CliError::io)?;
        }
        w.into_inner().map_err(|e| CliError::io(e.into_error()))
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let mut m = Map::new();
                    for (h, c) in self.header.iter().zip(r) {
                        m.insert(h.clone(), c.json());
                    }
                    Value::Object(m)
                })
                .collect(),
        )
    }
}

/// Tables plus scalar results of one command.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub summary: Map<String, Value>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn note<T: Serialize>(&mut self, key: &str, v: T) {
        let v = serde_json::to_value(v).unwrap_or(Value::Null);
        self.summary.insert(key.into(), v);
    }

    pub fn to_json(&self) -> Value {
        let tables: Map<String, Value> = self.tables.iter().map(|t| (t.name.clone(), t.to_json())).collect();
        json!({ "summary": self.summary, "tables": tables })
    }

    /// Files under `dir` (one per table plus summary.json), or the first
    /// table on stdout with the summary on stderr.
    pub fn emit(&self, format: Format, dir: Option<&Path>) -> Result<(), CliError> {
        match dir {
            Some(d) => {
                std::fs::create_dir_all(d).map_err(CliError::io)?;
                for t in &self.tables {
                    let (ext, bytes) = match format {
                        Format::Csv => ("csv", t.to_csv()?),
                        Format::Json => ("json", pretty(&t.to_json())),
                    };
                    write_atomic(&d.join(format!("{}.{ext}", t.name)), &bytes)?;
                }
                write_atomic(&d.join("summary.json"), &pretty(&Value::Object(self.summary.clone())))
            }
            None => {
                let mut out = std::io::stdout().lock();
                match format {
                    Format::Json => out.write_all(&pretty(&self.to_json())).map_err(CliError::io)?,
                    Format::Csv => {
                        if let Some(t) = self.tables.first() {
                            out.write_all(&t.to_csv()?).map_err(CliError::io)?;
                        }
                        let mut err = std::io::stderr().lock();
                        for (k, v) in &self.summary {
                            writeln!(err, "{k}: {v}").map_err(CliError::io)?;
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("JSON values always serialise");
    s.push(b'\n');
    s
}

/// Write to a sibling temporary file, then rename over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.partial"));
    std::fs::write(&tmp, bytes).map_err(CliError::io)?;
    std::fs::rename(&tmp, path).map_err(CliError::io)
}
