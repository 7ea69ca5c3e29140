//! Equality-form linear programs with box bounds: `opt c·x  s.t.  A·x = b,
//! lo <= x <= hi`. Columns are stored sparsely.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub col_labels: Vec<String>,
    pub row_labels: Vec<String>,
    col_start: Vec<usize>,
    row_index: Vec<usize>,
    values: Vec<f64>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram {
            sense,
            objective: Vec::new(),
            rhs: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            col_labels: Vec::new(),
            row_labels: Vec::new(),
            col_start: vec![0],
            row_index: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn num_cols(&self) -> usize {
        self.objective.len()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn add_row(&mut self, label: impl Into<String>, rhs: f64) -> usize {
        self.rhs.push(rhs);
        self.row_labels.push(label.into());
        self.rhs.len() - 1
    }

    /// Adds a column. Entries must reference existing rows; repeated rows
    /// are summed.
    pub fn add_column(
        &mut self,
        label: impl Into<String>,
        cost: f64,
        lower: f64,
        upper: f64,
        entries: &[(usize, f64)],
    ) -> usize {
        let mut sorted: Vec<(usize, f64)> = entries.to_vec();
        sorted.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(sorted.len());
        for (r, v) in sorted {
            assert!(r < self.num_rows(), "column entry references row {r} of {}", self.num_rows());
            match merged.last_mut() {
                Some(last) if last.0 == r => last.1 += v,
                _ => merged.push((r, v)),
            }
        }
        for (r, v) in merged {
            if v != 0.0 {
                self.row_index.push(r);
                self.values.push(v);
            }
        }
        self.col_start.push(self.row_index.len());
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.col_labels.push(label.into());
        self.objective.len() - 1
    }

    /// Sparse column `j` as parallel (row, value) slices.
    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.col_start[j], self.col_start[j + 1]);
        (&self.row_index[a..b], &self.values[a..b])
    }

    pub fn coefficient(&self, row: usize, col: usize) -> f64 {
        let (rows, vals) = self.column(col);
        rows.iter().position(|&r| r == row).map_or(0.0, |k| vals[k])
    }

    /// `A·x`.
    pub fn row_activity(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.num_cols() {
            return Err(Error::DimensionMismatch { expected: self.num_cols(), actual: x.len() });
        }
        let mut ax = vec![0.0; self.num_rows()];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            let (rows, vals) = self.column(j);
            for (&r, &v) in rows.iter().zip(vals) {
                ax[r] += v * xj;
            }
        }
        Ok(ax)
    }

    /// `Aᵀ·y`.
    pub fn column_activity(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.num_rows() {
            return Err(Error::DimensionMismatch { expected: self.num_rows(), actual: y.len() });
        }
        Ok((0..self.num_cols())
            .map(|j| {
                let (rows, vals) = self.column(j);
                rows.iter().zip(vals).map(|(&r, &v)| v * y[r]).sum()
            })
            .collect())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Copy with every objective coefficient multiplied by `k`.
    pub fn scaled_objective(&self, k: f64) -> Self {
        let mut lp = self.clone();
        lp.objective.iter_mut().for_each(|c| *c *= k);
        lp
    }
}

/// Per-row `|A·x − b|`.
pub fn row_residuals(lp: &LinearProgram, x: &[f64]) -> Result<Vec<f64>> {
    let ax = lp.row_activity(x)?;
    Ok(ax.iter().zip(&lp.rhs).map(|(a, b)| (a - b).abs()).collect())
}
