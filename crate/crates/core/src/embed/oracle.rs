use nalgebra::DMatrix;

use super::{Dataset, Embedding};
use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, SparseMatrix};

/// Largest `n * d` (and `n * c`) the dense reference will densify.
pub const ORACLE_SIZE_LIMIT: usize = 10_000_000;

/// Singular values below this fraction of the largest are treated as zero
/// when building the projector.
const RANK_CUTOFF: f64 = 1e-10;

fn to_nalgebra(m: &SparseMatrix) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.rows(), m.cols());
    for i in 0..m.rows() {
        let (idx, vals) = m.row(i);
        for (&j, &v) in idx.iter().zip(vals) {
            out[(i, j)] = v;
        }
    }
    out
}

fn from_nalgebra(m: &DMatrix<f64>) -> Result<DenseMatrix> {
    DenseMatrix::from_col_major(m.nrows(), m.ncols(), m.as_slice().to_vec())
}

fn guard(data_rows: usize, cols: usize, what: &str) -> Result<()> {
    if data_rows.saturating_mul(cols) > ORACLE_SIZE_LIMIT {
        return Err(Error::Refused(format!(
            "dense reference would materialize {data_rows}x{cols} {what}; limit is {ORACLE_SIZE_LIMIT} entries"
        )));
    }
    Ok(())
}

/// Orthonormal basis `U` of the column space of `x`, from a dense SVD.
fn column_space(x: &SparseMatrix) -> Result<DMatrix<f64>> {
    let xd = to_nalgebra(x);
    let svd = xd.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > RANK_CUTOFF * smax)
        .collect();
    let basis = u.select_columns(&keep);
    // Π² - Π = U (U^T U - I) U^T, so this certifies idempotence
    if !keep.is_empty() {
        let gram = basis.transpose() * &basis;
        let defect = (gram - DMatrix::identity(keep.len(), keep.len())).norm();
        if defect > 1e-10 {
            return Err(Error::Validation(format!(
                "projector is not idempotent (defect {defect:e})"
            )));
        }
    }
    Ok(basis)
}

/// Dense orthogonal projector onto the column space of `x` (n x n).
pub fn projector(x: &SparseMatrix) -> Result<DenseMatrix> {
    guard(x.rows(), x.cols(), "features")?;
    guard(x.rows(), x.rows(), "projector")?;
    let u = column_space(x)?;
    from_nalgebra(&(&u * u.transpose()))
}

/// Reference embedding computed densely: the top-`k` right singular vectors of
/// `Π Y`, with `sigma` the squared singular values so it lines up with the
/// eigenvalue estimates of the randomized method.
pub fn exact_oracle(data: &Dataset, k: usize) -> Result<Embedding> {
    guard(data.n(), data.d(), "features")?;
    guard(data.n(), data.c(), "labels")?;
    if k == 0 || k > data.c() {
        return Err(Error::Dimension(format!(
            "oracle needs 1 <= k <= c = {}, got {k}",
            data.c()
        )));
    }
    let u = column_space(data.x())?;
    let y = to_nalgebra(data.y());
    // Π Y = U (U^T Y), never forming the n x n projector
    let a = &u * (u.transpose() * &y);
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    if order.len() < k {
        return Err(Error::Rank {
            requested: k,
            achievable: order.len(),
        });
    }
    let c = data.c();
    let mut v = DMatrix::zeros(c, k);
    let mut sigma = Vec::with_capacity(k);
    for (col, &i) in order.iter().take(k).enumerate() {
        for r in 0..c {
            v[(r, col)] = vt[(i, r)];
        }
        let s = svd.singular_values[i];
        sigma.push(s * s);
    }
    Embedding::new(from_nalgebra(&v)?, sigma)
}
