use crate::error::{dim_err, Result};
use crate::linalg::sym_eig_topk;
use crate::matrix::{gemm, DenseMatrix};

/// Principal angles (radians, largest first) between `span(a)` and `span(b)`.
///
/// Both inputs must have orthonormal columns and `a.cols() <= b.cols()`.
/// Angles come from the singular values of `(I - B B^T) A`, i.e. their sines,
/// which stays accurate for the tiny angles used to compare nearly equal
/// subspaces (a cosine-based formula bottoms out near 1e-8).
pub fn principal_angles(a: &DenseMatrix, b: &DenseMatrix) -> Result<Vec<f64>> {
    if a.rows() != b.rows() {
        return dim_err(format!(
            "subspaces live in different dimensions ({} vs {})",
            a.rows(),
            b.rows()
        ));
    }
    if a.cols() > b.cols() || a.cols() == 0 {
        return dim_err(format!(
            "need 1 <= dim(a) <= dim(b), got {} and {}",
            a.cols(),
            b.cols()
        ));
    }
    let coeffs = gemm(b, a, true)?;
    let residual = a.sub(&gemm(b, &coeffs, false)?)?;
    let gram = gemm(&residual, &residual, true)?;
    let eig = sym_eig_topk(&gram, a.cols())?;
    Ok(eig
        .values
        .iter()
        .map(|s2| s2.sqrt().min(1.0).asin())
        .collect())
}

/// The largest principal angle between two subspaces.
pub fn max_principal_angle(a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
    Ok(principal_angles(a, b)?[0])
}
