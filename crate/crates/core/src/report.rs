//! Report files: `report.json`, `report.csv` and `manifest.json`.

use std::fs;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// One asserted check of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Gate {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Gate {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Gate {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

/// A CSV cell. Reals are written with 17 significant digits.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
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

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Real(v) if v.is_nan() => String::new(),
            Cell::Real(v) if v.is_infinite() => if *v > 0.0 { "inf" } else { "-inf" }.to_string(),
            Cell::Real(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Columns of ratio sweeps.
    pub fn ratio() -> Self {
        Table::new(&["case_id", "h", "s", "p", "eps", "L", "lhs", "rhs", "ratio"])
    }

    /// Columns of capacity scaling fits.
    pub fn scaling() -> Self {
        Table::new(&["t", "capacity", "log_t", "log_cap"])
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// What every experiment hands to [`emit_report`].
pub trait ExperimentReport: Serialize {
    fn name(&self) -> &'static str;
    fn gates(&self) -> Vec<Gate>;
    fn table(&self) -> Table;

    fn passed(&self) -> bool {
        self.gates().iter().all(|g| g.passed)
    }
}

/// The content of `report.json`. It holds no timing, so two runs with the
/// same configuration produce identical bytes.
pub fn report_json<R: ExperimentReport>(report: &R, params: &Value, seed: u64) -> Result<Value> {
    Ok(json!({
        "experiment": report.name(),
        "seed": seed,
        "params": params,
        "passed": report.passed(),
        "gates": report.gates(),
        "result": serde_json::to_value(report)?,
    }))
}

/// Writes `report.json`, `report.csv` and `manifest.json` into `dir`.
pub fn emit_report<R: ExperimentReport>(report: &R, dir: &Path, params: &Value, seed: u64, wall: Duration) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let body = serde_json::to_string_pretty(&report_json(report, params, seed)?)?;
    write(&dir.join("report.json"), &body)?;
    write(&dir.join("report.csv"), &report.table().to_csv()?)?;
    let manifest = json!({
        "experiment": report.name(),
        "params": params,
        "seed": seed,
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "wall_time_s": wall.as_secs_f64(),
    });
    write(&dir.join("manifest.json"), &serde_json::to_string_pretty(&manifest)?)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
