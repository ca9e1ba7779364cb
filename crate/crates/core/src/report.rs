//! Tables and experiment reports with stable CSV and JSON renderings.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

/// Significant digits written for every float.
pub const SIG_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Str(String),
    Int(i64),
    Num(f64),
    Bool(bool),
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Str(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Str(s)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

/// `%.12g`-style formatting.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= SIG_DIGITS as i32 {
        format!("{}e{}", trim_zeros(mant), exp)
    } else {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => fmt_num(*x),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Str(s) => Value::String(s.clone()),
            Cell::Int(i) => json!(i),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Num(x) => {
                let s = fmt_num(*x);
                match s.parse::<f64>() {
                    Ok(v) if v.is_finite() => json!(v),
                    _ => Value::String(s),
                }
            }
        }
    }
}

/// Row types with a fixed column order.
pub trait Tabular {
    fn columns() -> Vec<&'static str>;
    fn cells(&self) -> Vec<Cell>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn from_rows<T: Tabular>(name: &str, rows: &[T]) -> Self {
        let mut t = Table::new(name, &T::columns());
        for r in rows {
            t.push(r.cells());
        }
        t
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    /// False if any `pass` cell is false.
    pub fn pass(&self) -> bool {
        let Some(idx) = self.columns.iter().position(|c| c == "pass") else {
            return true;
        };
        self.rows.iter().all(|r| r[idx] != Cell::Bool(false))
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory csv");
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render)).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8")
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                for (c, v) in self.columns.iter().zip(r) {
                    m.insert(c.clone(), v.to_json());
                }
                Value::Object(m)
            })
            .collect();
        json!({ "name": self.name, "columns": self.columns, "rows": rows })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub suite: String,
    pub version: String,
    pub seed: u64,
    pub dims: Vec<usize>,
    pub tables: Vec<Table>,
    /// Not written to disk, so reruns stay byte-identical.
    pub wall_time: std::time::Duration,
}

impl ExperimentReport {
    pub fn new(suite: &str, seed: u64, dims: &[usize]) -> Self {
        ExperimentReport {
            suite: suite.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            dims: dims.to_vec(),
            tables: Vec::new(),
            wall_time: std::time::Duration::ZERO,
        }
    }

    pub fn pass(&self) -> bool {
        self.tables.iter().all(Table::pass)
    }

    pub fn failures(&self) -> usize {
        self.tables
            .iter()
            .map(|t| match t.columns.iter().position(|c| c == "pass") {
                Some(i) => t.rows.iter().filter(|r| r[i] == Cell::Bool(false)).count(),
                None => 0,
            })
            .sum()
    }

    pub fn to_json(&self) -> String {
        let v = json!({
            "suite": self.suite,
            "version": self.version,
            "seed": self.seed,
            "dims": self.dims,
            "pass": self.pass(),
            "tables": self.tables.iter().map(Table::to_json).collect::<Vec<_>>(),
        });
        let mut s = serde_json::to_string_pretty(&v).expect("json");
        s.push('\n');
        s
    }

    /// CSV rendering: one block per table, each headed by `# suite/table`.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for t in &self.tables {
            let _ = writeln!(s, "# {} v{} seed={} table={}", self.suite, self.version, self.seed, t.name);
            s.push_str(&t.to_csv());
        }
        s
    }

    /// Writes `<suite>.json` or one `<suite>_<table>.csv` per table into `dir`.
    pub fn write(&self, dir: &Path, format: Format) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        match format {
            Format::Json => {
                let p = dir.join(format!("{}.json", self.suite));
                std::fs::write(&p, self.to_json())?;
                out.push(p);
            }
            Format::Csv => {
                for t in &self.tables {
                    let p = dir.join(format!("{}_{}.csv", self.suite, t.name));
                    let mut body = format!("# {} v{} seed={}\n", self.suite, self.version, self.seed);
                    body.push_str(&t.to_csv());
                    std::fs::write(&p, body)?;
                    out.push(p);
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(std::f64::consts::PI * 1e6), "3141592.65359");
        assert_eq!(fmt_num(2.5e-9), "2.5e-9");
        assert_eq!(fmt_num(-4.0), "-4");
        assert_eq!(fmt_num(1e15), "1e15");
        assert_eq!(fmt_num(0.0), "0");
    }

    #[test]
    fn json_mirrors_csv() {
        let mut t = Table::new("t", &["id", "x", "pass"]);
        t.push(vec!["a,b".into(), Cell::Num(0.1 + 0.2), true.into()]);
        let csv = t.to_csv();
        assert_eq!(csv, "id,x,pass\n\"a,b\",0.3,true\n");
        let j = t.to_json();
        assert_eq!(j["rows"][0]["x"], json!(0.3));
        assert!(t.pass());
        t.push(vec!["c".into(), Cell::Num(f64::NAN), false.into()]);
        assert!(!t.pass());
        assert_eq!(t.to_json()["rows"][1]["x"], json!("nan"));
    }
}
