//! Column-major covariate matrices and regression datasets.

use crate::error::{Error, Result};

/// Dense column-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl ColMatrix {
    /// Wraps a column-major buffer of length `nrows * ncols`.
    pub fn from_col_major(nrows: usize, ncols: usize, data: Vec<f64>) -> Result<Self> {
        if nrows.checked_mul(ncols) != Some(data.len()) {
            return Err(Error::Data(format!(
                "buffer of length {} does not hold a {nrows} x {ncols} matrix",
                data.len()
            )));
        }
        Ok(Self { nrows, ncols, data })
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let nrows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != nrows) {
            return Err(Error::Data("columns have different lengths".into()));
        }
        let data = columns.iter().flatten().copied().collect();
        Ok(Self {
            nrows,
            ncols: columns.len(),
            data,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::Data("rows have different lengths".into()));
        }
        let mut data = vec![0.0; nrows * ncols];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                data[j * nrows + i] = v;
            }
        }
        Ok(Self { nrows, ncols, data })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.nrows + i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// New matrix holding the listed columns in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> ColMatrix {
        let mut data = Vec::with_capacity(cols.len() * self.nrows);
        for &j in cols {
            data.extend_from_slice(self.col(j));
        }
        ColMatrix {
            nrows: self.nrows,
            ncols: cols.len(),
            data,
        }
    }
}

/// Response vector, covariate matrix and column labels.
#[derive(Debug, Clone)]
pub struct Dataset {
    y: Vec<f64>,
    x: ColMatrix,
    labels: Vec<String>,
}

impl Dataset {
    /// Builds a dataset with labels `"1"`, `"2"`, ... .
    pub fn new(y: Vec<f64>, x: ColMatrix) -> Result<Self> {
        let labels = (1..=x.ncols()).map(|j| j.to_string()).collect();
        Self::with_labels(y, x, labels)
    }

    pub fn with_labels(y: Vec<f64>, x: ColMatrix, labels: Vec<String>) -> Result<Self> {
        if y.len() < 3 {
            return Err(Error::Data(format!(
                "at least 3 observations are required, got {}",
                y.len()
            )));
        }
        if x.ncols() == 0 {
            return Err(Error::Data("no covariate columns".into()));
        }
        if x.nrows() != y.len() {
            return Err(Error::Data(format!(
                "response has {} rows but the covariates have {}",
                y.len(),
                x.nrows()
            )));
        }
        if labels.len() != x.ncols() {
            return Err(Error::Data("one label per covariate column is required".into()));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("response value {} is not finite", i + 1)));
        }
        if let Some(pos) = x.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "covariate {} has a non-finite value in row {}",
                pos / x.nrows() + 1,
                pos % x.nrows() + 1
            )));
        }
        Ok(Self { y, x, labels })
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn x(&self) -> &ColMatrix {
        &self.x
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Number of observations.
    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Number of covariates.
    pub fn k(&self) -> usize {
        self.x.ncols()
    }

    /// Restriction to a subset of covariate columns, keeping their labels.
    pub fn restrict(&self, cols: &[usize]) -> Result<Dataset> {
        if let Some(&bad) = cols.iter().find(|&&j| j >= self.k()) {
            return Err(Error::domain(format!(
                "column index {} out of range 1..={}",
                bad + 1,
                self.k()
            )));
        }
        let labels = cols.iter().map(|&j| self.labels[j].clone()).collect();
        Dataset::with_labels(self.y.clone(), self.x.select_columns(cols), labels)
    }
}
