//! Delimited numeric text: parsing, response extraction and formatting.

use std::fmt::Write as _;

use crate::data::{ColMatrix, Dataset};
use crate::error::{Error, Result};

/// A rectangular numeric table, optionally with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Option<Vec<String>>,
    columns: Vec<Vec<f64>>,
}

fn split_fields(line: &str) -> Vec<&str> {
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

fn parse_cell(tok: &str) -> Option<f64> {
    tok.parse::<f64>().ok().filter(|v| v.is_finite())
}

impl Table {
    /// Parses comma- or whitespace-delimited text. The first non-empty line
    /// is a header when any of its fields is not a number. Lines starting
    /// with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut header = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut width = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields = split_fields(line);
            let at = |column: usize, message: String| Error::Parse {
                line: lineno + 1,
                column,
                message,
            };
            if let Some(w) = width {
                if fields.len() != w {
                    return Err(at(
                        fields.len().min(w) + 1,
                        format!("expected {w} fields, found {}", fields.len()),
                    ));
                }
            }
            let first = width.is_none();
            width = Some(fields.len());
            if first && fields.iter().any(|f| parse_cell(f).is_none()) {
                header = Some(fields.iter().map(|f| f.to_string()).collect());
                continue;
            }
            let mut row = Vec::with_capacity(fields.len());
            for (c, f) in fields.iter().enumerate() {
                row.push(parse_cell(f).ok_or_else(|| at(c + 1, format!("'{f}' is not a finite number")))?);
            }
            rows.push(row);
        }
        let width = width.ok_or_else(|| Error::Data("the input holds no data".into()))?;
        if rows.is_empty() {
            return Err(Error::Data("the input holds a header but no rows".into()));
        }
        let columns = (0..width)
            .map(|c| rows.iter().map(|r| r[c]).collect())
            .collect();
        Ok(Self { header, columns })
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn nrows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn header(&self) -> Option<&[String]> {
        self.header.as_deref()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    /// Resolves a column given by header name or 1-based index.
    pub fn column_index(&self, key: &str) -> Result<usize> {
        if let Some(h) = &self.header {
            if let Some(pos) = h.iter().position(|name| name == key) {
                return Ok(pos);
            }
        }
        match key.parse::<usize>() {
            Ok(i) if (1..=self.ncols()).contains(&i) => Ok(i - 1),
            Ok(i) => Err(Error::Data(format!(
                "column {i} out of range 1..={}",
                self.ncols()
            ))),
            Err(_) => Err(Error::Data(format!("no column named '{key}'"))),
        }
    }

    /// All columns as a matrix.
    pub fn matrix(&self) -> Result<ColMatrix> {
        ColMatrix::from_columns(&self.columns)
    }

    /// Splits into response and covariates; the response defaults to the
    /// last column.
    pub fn dataset(&self, response: Option<&str>) -> Result<Dataset> {
        if self.ncols() < 2 {
            return Err(Error::Data("need a response and at least one covariate".into()));
        }
        let r = match response {
            Some(key) => self.column_index(key)?,
            None => self.ncols() - 1,
        };
        let keep: Vec<usize> = (0..self.ncols()).filter(|&j| j != r).collect();
        let x: Vec<Vec<f64>> = keep.iter().map(|&j| self.columns[j].clone()).collect();
        let labels = match &self.header {
            Some(h) => keep.iter().map(|&j| h[j].clone()).collect(),
            None => keep.iter().map(|&j| (j + 1).to_string()).collect(),
        };
        Dataset::with_labels(self.columns[r].clone(), ColMatrix::from_columns(&x)?, labels)
    }
}

/// Writes a matrix as comma-separated text with shortest round-trip
/// numbers, preceded by an optional header.
pub fn write_matrix(x: &ColMatrix, header: Option<&[String]>) -> String {
    let mut out = String::new();
    if let Some(h) = header {
        let _ = writeln!(out, "{}", h.join(","));
    }
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", x.get(i, j));
        }
        out.push('\n');
    }
    out
}

/// Seven significant digits; scientific notation below 1e-3.
pub fn format_pvalue(p: f64) -> String {
    if p == 0.0 {
        "0".to_string()
    } else if !p.is_finite() {
        p.to_string()
    } else if p.abs() < 1e-3 {
        format!("{p:.6e}")
    } else {
        let decimals = (6 - p.abs().log10().floor() as i32).max(0) as usize;
        format!("{p:.decimals$}")
    }
}

/// Fixed-point value with seven significant digits, for sums of squares.
pub fn format_real(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return v.to_string();
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-4..15).contains(&mag) {
        return format!("{v:.6e}");
    }
    let decimals = (6 - mag).max(0) as usize;
    format!("{v:.decimals$}")
}
