use std::fs;
use std::path::{Path, PathBuf};

use pform::json::fmt_f64;
use serde::Serialize;

use crate::commands::Failure;

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, Failure> {
    let text = pform::json::to_string(value).map_err(|e| Failure::numerical(e.to_string()))?;
    write(dir, name, text.as_bytes())
}

/// CSV with a header row; `f64` cells go through [`fmt_f64`].
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Int(i64::from(x))
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(
            row.into_iter()
                .map(|c| match c {
                    Cell::Float(x) => fmt_f64(x),
                    Cell::Int(i) => i.to_string(),
                    Cell::Text(s) => s,
                })
                .collect(),
        );
    }

    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf, Failure> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Failure::io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::io(e.to_string()))?;
        write(dir, name, &bytes)
    }
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    Ok(path)
}
