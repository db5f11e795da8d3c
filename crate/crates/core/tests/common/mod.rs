//! Dense reference computations for the integration tests. Everything here
//! goes through nalgebra directly and never calls the solver or eigensolver
//! under test.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rembed_core::{DenseMatrix, SparseMatrix};

pub fn dense(m: &SparseMatrix) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.rows(), m.cols());
    for i in 0..m.rows() {
        let (idx, vals) = m.row(i);
        for (&j, &v) in idx.iter().zip(vals) {
            out[(i, j)] = v;
        }
    }
    out
}

pub fn na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(m.rows(), m.cols(), m.as_slice())
}

pub fn ours(m: &DMatrix<f64>) -> DenseMatrix {
    DenseMatrix::from_col_major(m.nrows(), m.ncols(), m.as_slice().to_vec()).unwrap()
}

/// Top-`k` right singular vectors and all singular values (descending).
pub fn top_right_singular(a: &DMatrix<f64>, k: usize) -> (DenseMatrix, Vec<f64>) {
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.unwrap();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let mut v = DMatrix::zeros(a.ncols(), k);
    for (c, &i) in order.iter().take(k).enumerate() {
        for r in 0..a.ncols() {
            v[(r, c)] = vt[(i, r)];
        }
    }
    let s = order.iter().map(|&i| svd.singular_values[i]).collect();
    (ours(&v), s)
}

/// `X (X^T X)^{-1} X^T` for full-column-rank `X`, via Cholesky.
pub fn projector_normal_equations(x: &SparseMatrix) -> DMatrix<f64> {
    let xd = dense(x);
    let gram = xd.transpose() * &xd;
    let chol = gram.cholesky().expect("full column rank");
    let inv_xt = chol.solve(&xd.transpose());
    &xd * inv_xt
}

/// Brute-force rank-k least squares: `min ‖Y - A_k‖²_F` with `A = X X^+ Y`.
pub fn rank_constrained_optimum(x: &SparseMatrix, y: &SparseMatrix, k: usize) -> f64 {
    let xd = dense(x);
    let yd = dense(y);
    let pinv = xd.clone().pseudo_inverse(1e-12).unwrap();
    let w_star = pinv * &yd;
    let a = &xd * w_star;
    let svd = a.svd(true, true);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let mut ak = DMatrix::zeros(yd.nrows(), yd.ncols());
    for &i in order.iter().take(k) {
        ak += svd.singular_values[i] * u.column(i) * vt.row(i);
    }
    (yd - ak).norm_squared()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
