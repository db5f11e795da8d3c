use crate::error::{dim_err, Result};
use crate::matrix::{axpy, dot, norm2, DenseMatrix};

/// Columns whose residual after projection is below this fraction of the
/// largest input column norm are treated as linearly dependent.
pub const DROP_TOLERANCE: f64 = 1e-12;

/// Orthonormal basis for the column space of `m`.
///
/// Classical Gram–Schmidt with iterated reorthogonalization: each column is
/// projected against the accepted basis repeatedly (at most four passes) until
/// a pass removes less than 30% of its norm. Columns whose remaining norm falls
/// below [`DROP_TOLERANCE`] times the largest column norm are dropped, so a
/// rank-`r` input yields exactly `r` columns. An all-zero input yields a
/// zero-column matrix.
pub fn orthogonalize(m: &DenseMatrix) -> Result<DenseMatrix> {
    if m.rows() == 0 || m.cols() == 0 {
        return dim_err(format!(
            "orthogonalize needs a non-empty matrix, got {}x{}",
            m.rows(),
            m.cols()
        ));
    }
    let largest = (0..m.cols()).map(|j| m.column_norm(j)).fold(0.0, f64::max);
    let drop = DROP_TOLERANCE * largest;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m.cols());
    if largest == 0.0 {
        return Ok(DenseMatrix::zeros(m.rows(), 0));
    }
    let mut coeffs = Vec::with_capacity(m.cols());
    for j in 0..m.cols() {
        let mut v = m.col(j).to_vec();
        let mut norm = norm2(&v);
        for _ in 0..4 {
            if norm <= drop || basis.is_empty() {
                break;
            }
            coeffs.clear();
            coeffs.extend(basis.iter().map(|q| dot(q, &v)));
            for (q, &c) in basis.iter().zip(&coeffs) {
                axpy(-c, q, &mut v);
            }
            let after = norm2(&v);
            let shrink = after / norm;
            norm = after;
            if shrink > 0.7 {
                break;
            }
        }
        if norm > drop {
            let inv = 1.0 / norm;
            v.iter_mut().for_each(|e| *e *= inv);
            basis.push(v);
        }
    }
    DenseMatrix::from_columns(m.rows(), &basis)
}
