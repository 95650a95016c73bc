//! Artifact emission: CSV tables, JSON reports and the summary table.
//!
//! Every float leaves the program rounded to 12 significant digits, so
//! identical inputs give byte-identical artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

pub const SIG_DIGITS: usize = 12;

/// `x` rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().expect("formatted float parses")
}

/// Shortest decimal that round-trips the 12-digit rounding.
pub fn fmt12(x: f64) -> String {
    let r = round12(x);
    if r == 0.0 {
        // no negative zero in artifacts
        return "0".into();
    }
    format!("{r}")
}

fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) => match (n.is_f64(), n.as_f64()) {
            (true, Some(x)) => serde_json::Number::from_f64(round12(x) + 0.0).map_or(Value::Null, Value::Number),
            _ => Value::Number(n),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

pub fn to_json<T: Serialize>(report: &T) -> Result<String> {
    let v = round_json(serde_json::to_value(report)?);
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

/// A numeric table with a header row.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells.into_iter().map(Cell::render).collect());
    }

    fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))
    }
}

pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(self) -> String {
        match self {
            Cell::Num(x) => fmt12(x),
            Cell::Text(s) => s,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<usize> for Cell {
    fn from(k: usize) -> Self {
        Cell::Text(k.to_string())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(b.to_string())
    }
}

#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($crate::output::Cell::from($x)),*] };
}

/// Output directory plus the list of files written, in write order.
pub struct Artifacts {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Artifacts { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path);
        Ok(())
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> Result<()> {
        self.write(name, &table.to_csv()?)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, report: &T) -> Result<()> {
        self.write(name, to_json(report)?.as_bytes())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

/// Two-column summary printed to stdout.
#[derive(Default)]
pub struct Summary {
    rows: Vec<(String, String)>,
}

impl Summary {
    pub fn add(&mut self, key: &str, value: impl Into<Cell>) -> &mut Self {
        self.rows.push((key.to_string(), value.into().render()));
        self
    }

    pub fn render(&self) -> String {
        let w = self.rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        self.rows.iter().map(|(k, v)| format!("{k:<w$}  {v}\n")).collect()
    }
}
