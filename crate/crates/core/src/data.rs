//! Dense row-major data matrices (objects × features).

use crate::error::{invalid, NbseError, Result};

/// `M` objects by `D` features, row-major, all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    /// Validating constructor: `M ≥ 2`, `D ≥ 1`, finite entries.
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows < 2 {
            return invalid(format!("data matrix needs at least 2 rows, got {rows}"));
        }
        if cols < 1 {
            return invalid("data matrix needs at least 1 column");
        }
        if values.len() != rows * cols {
            return Err(NbseError::DimensionMismatch {
                expected: rows * cols,
                actual: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!(
                "non-finite entry at row {}, column {}",
                pos / cols,
                pos % cols
            ));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return invalid(format!(
                "ragged rows: row {bad} has {} entries, expected {cols}",
                rows[bad].len()
            ));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Build from column vectors of equal length.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return invalid("columns have different lengths");
        }
        let mut values = vec![0.0; rows * cols];
        for (l, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                values[i * cols + l] = v;
            }
        }
        Self::new(rows, cols, values)
    }

    /// Zero-width matrix with `rows` rows; only produced by column selection.
    pub(crate) fn empty_columns(rows: usize) -> Self {
        Self {
            rows,
            cols: 0,
            values: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, l: usize) -> f64 {
        self.values[i * self.cols + l]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, l: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, l)).collect()
    }

    /// Single-column matrix holding feature `l`.
    pub fn column_matrix(&self, l: usize) -> Result<Self> {
        if l >= self.cols {
            return invalid(format!(
                "feature index {l} out of range for {} columns",
                self.cols
            ));
        }
        Self::new(self.rows, 1, self.column(l))
    }

    pub fn transpose(&self) -> Self {
        let mut values = vec![0.0; self.values.len()];
        for i in 0..self.rows {
            for l in 0..self.cols {
                values[l * self.rows + i] = self.get(i, l);
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            values,
        }
    }

    /// Zero mean, unit (population) variance per column. Constant columns
    /// are centred and left at zero.
    pub fn standardized(&self) -> Self {
        let m = self.rows as f64;
        let mut out = self.clone();
        for l in 0..self.cols {
            let mean = (0..self.rows).map(|i| self.get(i, l)).sum::<f64>() / m;
            let var = (0..self.rows)
                .map(|i| (self.get(i, l) - mean).powi(2))
                .sum::<f64>()
                / m;
            let sd = var.sqrt();
            for i in 0..self.rows {
                let centred = self.get(i, l) - mean;
                out.values[i * self.cols + l] = if sd > 0.0 { centred / sd } else { 0.0 };
            }
        }
        out
    }

    /// Columns `indices` in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&l| l >= self.cols) {
            return invalid(format!(
                "column index {bad} out of range for {} columns",
                self.cols
            ));
        }
        if indices.is_empty() {
            return Ok(Self::empty_columns(self.rows));
        }
        let mut values = Vec::with_capacity(self.rows * indices.len());
        for i in 0..self.rows {
            values.extend(indices.iter().map(|&l| self.get(i, l)));
        }
        Ok(Self {
            rows: self.rows,
            cols: indices.len(),
            values,
        })
    }

    /// Rows `indices` in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.rows) {
            return invalid(format!("row index {bad} out of range for {} rows", self.rows));
        }
        let values = indices.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        Ok(Self {
            rows: indices.len(),
            cols: self.cols,
            values,
        })
    }

    pub fn squared_distance(&self, i: usize, j: usize) -> f64 {
        self.row(i)
            .iter()
            .zip(self.row(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}
