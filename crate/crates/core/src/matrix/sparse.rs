use crate::error::{dim_err, Error, Result};

use super::DenseMatrix;

/// Compressed sparse row matrix.
///
/// Column indices are strictly increasing within each row and no explicit
/// zeros are stored. Both `X` (features) and `Y` (labels) live in this form,
/// since every product the embedding needs streams over rows once.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Validates raw CSR arrays.
    pub fn from_csr(
        rows: usize,
        cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != rows + 1 {
            return dim_err(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                rows + 1
            ));
        }
        if col_indices.len() != values.len() {
            return dim_err("col_indices and values differ in length");
        }
        if row_offsets[0] != 0 || row_offsets[rows] != values.len() {
            return Err(Error::Validation(
                "row_offsets must start at 0 and end at nnz".into(),
            ));
        }
        for i in 0..rows {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            if lo > hi {
                return Err(Error::Validation(format!("row_offsets decrease at row {i}")));
            }
            let idx = &col_indices[lo..hi];
            for (p, &j) in idx.iter().enumerate() {
                if j >= cols {
                    return dim_err(format!("column index {j} out of range at row {i}"));
                }
                if p > 0 && idx[p - 1] >= j {
                    return Err(Error::Validation(format!(
                        "column indices not strictly increasing in row {i}"
                    )));
                }
            }
            for (p, v) in values[lo..hi].iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: idx[p] });
                }
                if *v == 0.0 {
                    return Err(Error::Validation(format!(
                        "explicit zero stored at ({i}, {})",
                        idx[p]
                    )));
                }
            }
        }
        Ok(Self {
            rows,
            cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds a matrix from per-row `(column, value)` lists. Entries are sorted,
    /// duplicates summed and zeros dropped.
    pub fn from_rows(cols: usize, rows: &[Vec<(usize, f64)>]) -> Result<Self> {
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            scratch.clear();
            scratch.extend_from_slice(row);
            scratch.sort_by_key(|e| e.0);
            let mut p = 0;
            while p < scratch.len() {
                let j = scratch[p].0;
                if j >= cols {
                    return dim_err(format!("column index {j} out of range at row {i}"));
                }
                let mut v = 0.0;
                while p < scratch.len() && scratch[p].0 == j {
                    v += scratch[p].1;
                    p += 1;
                }
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if v != 0.0 {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(values.len());
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds a matrix from `(row, col, value)` triplets in any order.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut per_row = vec![Vec::new(); rows];
        for (i, j, v) in triplets {
            if i >= rows {
                return dim_err(format!("row index {i} out of range"));
            }
            per_row[i].push((j, v));
        }
        Self::from_rows(cols, &per_row)
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, alpha: f64) -> Self {
        assert!(alpha != 0.0 && alpha.is_finite());
        Self {
            rows: n,
            cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![alpha; n],
        }
    }

    /// Sparsifies a dense matrix, keeping nonzero entries only.
    pub fn from_dense(m: &DenseMatrix) -> Self {
        let rows: Vec<Vec<(usize, f64)>> = (0..m.rows())
            .map(|i| {
                (0..m.cols())
                    .filter_map(|j| {
                        let v = m.get(i, j);
                        (v != 0.0).then_some((j, v))
                    })
                    .collect()
            })
            .collect();
        Self::from_rows(m.cols(), &rows).expect("dense matrix entries are finite")
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values stored in row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    #[inline]
    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_offsets[i + 1] - self.row_offsets[i]
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            let (idx, vals) = self.row(i);
            for (&j, &v) in idx.iter().zip(vals) {
                out.set(i, j, v);
            }
        }
        out
    }

    /// Changes the declared column count. Growing is always allowed; shrinking
    /// fails if a stored index would fall out of range.
    pub fn with_cols(mut self, cols: usize) -> Result<Self> {
        if let Some(&max) = self.col_indices.iter().max() {
            if max >= cols {
                return dim_err(format!("column index {max} does not fit in {cols} columns"));
            }
        }
        self.cols = cols;
        Ok(self)
    }

    /// Rows `range` as a new matrix.
    pub fn slice_rows(&self, range: std::ops::Range<usize>) -> Self {
        let (lo, hi) = (self.row_offsets[range.start], self.row_offsets[range.end]);
        Self {
            rows: range.len(),
            cols: self.cols,
            row_offsets: self.row_offsets[range.start..=range.end]
                .iter()
                .map(|o| o - lo)
                .collect(),
            col_indices: self.col_indices[lo..hi].to_vec(),
            values: self.values[lo..hi].to_vec(),
        }
    }

    /// `y = A x`.
    pub(crate) fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
            let mut acc = 0.0;
            for p in lo..hi {
                acc += self.values[p] * x[self.col_indices[p]];
            }
            *yi = acc;
        }
    }

    /// `x += A^T y`, accumulated per stored entry.
    pub(crate) fn matvec_t_add(&self, y: &[f64], x: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(x.len(), self.cols);
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
            for p in lo..hi {
                x[self.col_indices[p]] += self.values[p] * yi;
            }
        }
    }
}
