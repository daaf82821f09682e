//! Tabular experiment output and its CSV form.
//!
//! Every value column `x` is written twice: `x` holds the exact rational
//! (`p/2^k`, or `p/q` when the denominator is not a power of two) and
//! `x_decimal` a 15-significant-digit rendering. Wall-clock runtime is kept
//! out of the CSV so that equal inputs give byte-identical files.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::error::Result;
use crate::value::{decimal, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnKind {
    Plain,
    Value,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Plain(String),
    Value(Real),
}

impl Cell {
    pub fn text(s: impl fmt::Display) -> Self {
        Cell::Plain(s.to_string())
    }
}

impl From<Real> for Cell {
    fn from(v: Real) -> Self {
        Cell::Value(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub name: String,
    pub seed: u64,
    /// Named parameters, repeated on every row.
    pub params: Vec<(String, String)>,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    /// Headline numbers for the one-line summary.
    pub summary: Vec<(String, String)>,
    pub runtime: Duration,
}

impl ExperimentReport {
    pub fn new(
        name: &str,
        seed: u64,
        params: Vec<(String, String)>,
        columns: &[(&str, ColumnKind)],
    ) -> Self {
        ExperimentReport {
            name: name.to_string(),
            seed,
            params,
            columns: columns
                .iter()
                .map(|&(name, kind)| Column {
                    name: name.to_string(),
                    kind,
                })
                .collect(),
            rows: Vec::new(),
            summary: Vec::new(),
            runtime: Duration::ZERO,
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl fmt::Display) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn header(&self) -> Vec<String> {
        let mut out = vec!["experiment".to_string(), "seed".to_string()];
        out.extend(self.params.iter().map(|(k, _)| k.clone()));
        for c in &self.columns {
            out.push(c.name.clone());
            if c.kind == ColumnKind::Value {
                out.push(format!("{}_decimal", c.name));
            }
        }
        out
    }

    fn record(&self, row: &[Cell]) -> Vec<String> {
        let mut out = vec![self.name.clone(), self.seed.to_string()];
        out.extend(self.params.iter().map(|(_, v)| v.clone()));
        for (cell, column) in row.iter().zip(&self.columns) {
            match (cell, column.kind) {
                (Cell::Plain(s), ColumnKind::Plain) => out.push(s.clone()),
                (Cell::Plain(s), ColumnKind::Value) => {
                    out.push(s.clone());
                    out.push(String::new());
                }
                (Cell::Value(v), ColumnKind::Value) => {
                    out.push(match v {
                        Real::Exact(_) => v.render(),
                        Real::Approx(_) => String::new(),
                    });
                    out.push(decimal(v.to_f64()));
                }
                (Cell::Value(v), ColumnKind::Plain) => out.push(v.render()),
            }
        }
        out
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(self.header())?;
        for row in &self.rows {
            writer.write_record(self.record(row))?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| crate::error::Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    /// `<experiment>-<timestamp>.csv`.
    pub fn file_name(&self, timestamp: u64) -> String {
        format!("{}-{}.csv", self.name, timestamp)
    }

    pub fn write_csv(&self, dir: &Path, timestamp: u64) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(self.file_name(timestamp));
        std::fs::write(&path, self.to_csv_string()?)?;
        Ok(path)
    }

    /// `name: k=v k=v ...` on one line.
    pub fn summary_line(&self) -> String {
        let mut line = format!("{}: rows={}", self.name, self.rows.len());
        for (k, v) in &self.summary {
            line.push_str(&format!(" {k}={v}"));
        }
        line
    }
}
