//! Sparse and dense matrices, the seeded random stream, and the handful of
//! products the embedding is built from.
//!
//! All products return fresh matrices; inputs are never mutated.

mod dense;
mod rng;
mod sparse;

pub use dense::DenseMatrix;
pub use rng::{SeededRng, RNG_ALGORITHM};
pub use sparse::SparseMatrix;

pub(crate) use dense::{axpy, dot, norm2};

use crate::error::{dim_err, Result};

/// `rows x cols` matrix of i.i.d. standard normals, filled column by column.
pub fn randn(rows: usize, cols: usize, rng: &mut SeededRng) -> Result<DenseMatrix> {
    if rows == 0 || cols == 0 {
        return dim_err(format!("randn needs positive dimensions, got {rows}x{cols}"));
    }
    let data = (0..rows * cols).map(|_| rng.normal()).collect();
    Ok(DenseMatrix::from_parts_unchecked(rows, cols, data))
}

/// Sparse-times-dense product `A B`. Cost is `nnz(A) * B.cols`.
pub fn spmm(a: &SparseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.cols() != b.rows() {
        return dim_err(format!(
            "spmm: A is {}x{}, B is {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        ));
    }
    let mut out = DenseMatrix::zeros(a.rows(), b.cols());
    for j in 0..b.cols() {
        a.matvec_into(b.col(j), out.col_mut(j));
    }
    out.checked()
}

/// `A^T B` without forming `A^T`: each stored entry `a_ij` scatters
/// `a_ij * B[i, :]` into row `j` of the result.
pub fn spmm_t(a: &SparseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.rows() != b.rows() {
        return dim_err(format!(
            "spmm_t: A is {}x{}, B is {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        ));
    }
    let mut out = DenseMatrix::zeros(a.cols(), b.cols());
    for j in 0..b.cols() {
        a.matvec_t_add(b.col(j), out.col_mut(j));
    }
    out.checked()
}

/// Dense product `A B`, or `A^T B` when `transpose_a` is set.
pub fn gemm(a: &DenseMatrix, b: &DenseMatrix, transpose_a: bool) -> Result<DenseMatrix> {
    let (m, inner) = if transpose_a {
        (a.cols(), a.rows())
    } else {
        (a.rows(), a.cols())
    };
    if inner != b.rows() {
        return dim_err(format!(
            "gemm: op(A) is {m}x{inner}, B is {}x{}",
            b.rows(),
            b.cols()
        ));
    }
    let mut out = DenseMatrix::zeros(m, b.cols());
    if transpose_a {
        // every entry is a dot product of two contiguous columns
        for j in 0..b.cols() {
            let bj = b.col(j);
            for i in 0..m {
                out.set(i, j, dot(a.col(i), bj));
            }
        }
    } else {
        for j in 0..b.cols() {
            let oj = out.col_mut(j);
            for p in 0..inner {
                let bpj = b.get(p, j);
                if bpj != 0.0 {
                    axpy(bpj, a.col(p), oj);
                }
            }
        }
    }
    out.checked()
}
