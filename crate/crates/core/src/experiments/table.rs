//! CSV result tables with an embedded provenance block.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            // 17 significant digits round-trip every f64
            Cell::Real(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Real(v) if v.is_nan() => "NaN".into(),
            Cell::Real(v) => if *v > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
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

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::Real(v.unwrap_or(f64::NAN))
    }
}

/// Output of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub experiment: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// `# key = value` lines written before the header.
    pub provenance: Vec<(String, String)>,
    /// Conjunction of all pass flags of the run.
    pub pass: bool,
    /// Human-readable summary for standard output.
    pub summary: String,
}

impl ResultTable {
    pub fn new(experiment: &str, header: Vec<&'static str>) -> Self {
        Self {
            experiment: experiment.to_string(),
            header,
            rows: Vec::new(),
            provenance: Vec::new(),
            pass: true,
            summary: String::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Values of one column, rendered.
    pub fn column(&self, name: &str) -> Option<Vec<String>> {
        let i = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r[i].render()).collect())
    }

    /// Numeric column, parsed back from its rendering.
    pub fn real_column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| *h == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r[i] {
                    Cell::Real(v) => *v,
                    Cell::Int(v) => *v as f64,
                    _ => f64::NAN,
                })
                .collect(),
        )
    }

    /// CSV text: provenance comments, header, rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.provenance {
            let _ = writeln!(out, "# {k} = {v}");
        }
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// Writes the CSV to `dir/<experiment>.csv`, or to `file` when given
    /// (relative to `dir`), and returns the path.
    pub fn write(&self, dir: &Path, file: Option<&str>) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = match file {
            Some(f) => dir.join(f),
            None => dir.join(format!("{}.csv", self.experiment)),
        };
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, self.to_csv())?;
        Ok(path)
    }
}
