use log::warn;

use super::{Dataset, EmbedConfig, Embedding};
use crate::error::{dim_err, Error, Result};
use crate::linalg::{orthogonalize, sym_eig_topk};
use crate::matrix::{gemm, randn, spmm, spmm_t, DenseMatrix, SeededRng, SparseMatrix};

/// Data-independent random label embedding (the compressed-sensing baseline).
/// `sigma` is all ones since nothing about the labels is measured.
pub fn cs_embed(c: usize, k: usize, seed: u64) -> Result<Embedding> {
    if k == 0 || k > c {
        return dim_err(format!("cs_embed needs 1 <= k <= c, got k = {k}, c = {c}"));
    }
    let q = orthogonalize(&randn(c, k, &mut SeededRng::new(seed))?)?;
    if q.cols() < k {
        return Err(Error::Rank {
            requested: k,
            achievable: q.cols(),
        });
    }
    Embedding::new(q, vec![1.0; k])
}

/// Column-centered view of a sparse matrix, applied without densifying.
struct Centered<'a> {
    x: &'a SparseMatrix,
    mean: Vec<f64>,
}

impl<'a> Centered<'a> {
    fn new(x: &'a SparseMatrix) -> Self {
        let mut mean = vec![0.0; x.cols()];
        let ones = vec![1.0; x.rows()];
        x.matvec_t_add(&ones, &mut mean);
        let n = x.rows().max(1) as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        Self { x, mean }
    }

    /// `(X - 1 μ^T) B`.
    fn apply(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        let xb = spmm(self.x, b)?;
        let shift: Vec<f64> = (0..b.cols())
            .map(|j| b.col(j).iter().zip(&self.mean).map(|(a, m)| a * m).sum())
            .collect();
        let mut data = xb.into_vec();
        let n = self.x.rows();
        for (j, s) in shift.iter().enumerate() {
            data[j * n..(j + 1) * n].iter_mut().for_each(|v| *v -= s);
        }
        DenseMatrix::from_col_major(n, b.cols(), data)
    }

    /// `(X - 1 μ^T)^T T`.
    fn apply_t(&self, t: &DenseMatrix) -> Result<DenseMatrix> {
        let xt = spmm_t(self.x, t)?;
        let d = self.x.cols();
        let mut data = xt.into_vec();
        for j in 0..t.cols() {
            let s: f64 = t.col(j).iter().sum();
            for (v, m) in data[j * d..(j + 1) * d].iter_mut().zip(&self.mean) {
                *v -= s * m;
            }
        }
        DenseMatrix::from_col_major(d, t.cols(), data)
    }
}

/// Unsupervised feature embedding: the top-`k` right singular subspace of the
/// column-centered `X`, as a `d x k` matrix `W` with orthonormal columns.
///
/// Uses the same randomized range finder as the label embedding, applied to
/// `X_c^T X_c`, with `cfg.p` oversampling and `cfg.q` power iterations, then a
/// dense eigensolve of the projected Gram matrix.
pub fn pca_feature_embed(data: &Dataset, k: usize, cfg: &EmbedConfig) -> Result<DenseMatrix> {
    let d = data.d();
    if k == 0 || k > d {
        return dim_err(format!("pca needs 1 <= k <= d, got k = {k}, d = {d}"));
    }
    let mut width = k + cfg.p;
    if width > d {
        if cfg.p > 0 && k < d {
            warn!("oversampled width {width} exceeds d = {d}; clamping");
        }
        width = d;
    }
    let xc = Centered::new(data.x());
    let mut rng = SeededRng::new(cfg.seed);
    let mut q = orthogonalize(&randn(d, width, &mut rng)?)?;
    for _ in 0..cfg.q {
        q = orthogonalize(&xc.apply_t(&xc.apply(&q)?)?)?;
        if q.cols() < k {
            return Err(Error::Rank {
                requested: k,
                achievable: q.cols(),
            });
        }
    }
    let t = xc.apply(&q)?;
    let gram = gemm(&t, &t, true)?;
    let eig = sym_eig_topk(&gram, k)?;
    gemm(&q, &eig.vectors, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::max_principal_angle;

    #[test]
    fn cs_embed_square_is_orthogonal() {
        let e = cs_embed(5, 5, 3).unwrap();
        assert!(e.orthonormality_defect() < 1e-10);
        assert_eq!(e.sigma(), &[1.0; 5]);
        assert_eq!(cs_embed(5, 5, 3).unwrap(), e);
    }

    #[test]
    fn cs_embed_rejects_k_above_c() {
        assert!(matches!(cs_embed(3, 4, 0), Err(Error::Dimension(_))));
    }

    #[test]
    fn pca_picks_the_only_varying_coordinate() {
        // column 0 is constant, column 1 varies
        let rows: Vec<Vec<(usize, f64)>> = (0..10)
            .map(|i| vec![(0, 2.0), (1, (i as f64) - 3.0)])
            .collect();
        let x = SparseMatrix::from_rows(2, &rows).unwrap();
        let y = SparseMatrix::from_rows(1, &vec![vec![(0, 1.0)]; 10]).unwrap();
        let data = Dataset::new(x, y).unwrap();
        let w = pca_feature_embed(&data, 1, &EmbedConfig::new(1)).unwrap();
        assert!(w.get(1, 0).abs() > 0.99);
    }

    #[test]
    fn pca_full_dimension_reconstructs() {
        let g = randn(30, 4, &mut SeededRng::new(8)).unwrap();
        let x = SparseMatrix::from_dense(&g);
        let y = SparseMatrix::from_rows(1, &vec![vec![(0, 1.0)]; 30]).unwrap();
        let data = Dataset::new(x.clone(), y).unwrap();
        let w = pca_feature_embed(&data, 4, &EmbedConfig::new(4)).unwrap();
        let wtw = gemm(&w, &w, true).unwrap();
        assert!(wtw.max_abs_diff(&DenseMatrix::identity(4)) < 1e-10);
        let xc = Centered::new(&x);
        let centered = xc.apply(&DenseMatrix::identity(4)).unwrap();
        let recon = gemm(&gemm(&centered, &w, false).unwrap(), &w.transpose(), false).unwrap();
        assert!(recon.max_abs_diff(&centered) < 1e-8);
        assert!(max_principal_angle(&w, &DenseMatrix::identity(4)).unwrap() < 1e-10);
    }

    #[test]
    fn pca_rejects_k_above_d() {
        let data = Dataset::new(
            SparseMatrix::identity(2),
            SparseMatrix::from_rows(1, &[vec![(0, 1.0)], vec![(0, 1.0)]]).unwrap(),
        )
        .unwrap();
        assert!(pca_feature_embed(&data, 3, &EmbedConfig::new(3)).is_err());
    }
}
