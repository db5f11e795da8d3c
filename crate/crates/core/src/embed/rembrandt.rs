use log::warn;

use super::{Dataset, EmbedConfig, Embedding};
use crate::error::{dim_err, Error, Result};
use crate::linalg::{orthogonalize, ridge_lstsq_report, sym_eig_topk, SolverConfig};
use crate::matrix::{gemm, randn, spmm, spmm_t, DenseMatrix, SeededRng};

/// What a call to [`rembrandt_embed_detailed`] actually did.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbedDiagnostics {
    /// Range-finder width after clamping `k + p` to `c`.
    pub width: usize,
    /// Basis size that survived orthogonalization on the final pass.
    pub surviving_rank: usize,
    /// Passes over `(X, Y)`, always `q + 1`.
    pub data_passes: usize,
    /// Largest LSQR iteration count over all columns and passes.
    pub max_solver_iterations: usize,
    pub lambda: f64,
}

/// Randomized embedding of the labels.
///
/// Finds the dominant eigenvectors of `Y^T Π Y`, where `Π` projects onto the
/// column space of `X`, without ever forming `Π`: for any `Q`, the product
/// `Y^T Π Y Q` equals `Y^T X Z` with `Z` the least-squares fit of `Y Q` on `X`.
/// The range finder therefore alternates a regression with an
/// orthogonalization, and a final regression produces `M = Y^T Π Y Q`, whose
/// Gram matrix `M^T M` is small enough to diagonalize directly.
///
/// `sigma` holds the estimated eigenvalues of `Y^T Π Y` (equivalently the
/// squared singular values of `Π Y`).
pub fn rembrandt_embed(data: &Dataset, cfg: &EmbedConfig) -> Result<Embedding> {
    rembrandt_embed_detailed(data, cfg).map(|(e, _)| e)
}

pub fn rembrandt_embed_detailed(
    data: &Dataset,
    cfg: &EmbedConfig,
) -> Result<(Embedding, EmbedDiagnostics)> {
    cfg.validate()?;
    let (x, y) = (data.x(), data.y());
    let c = data.c();
    if cfg.k > c {
        return dim_err(format!("k = {} exceeds the number of labels c = {c}", cfg.k));
    }
    let mut width = cfg.k + cfg.p;
    if width > c {
        warn!(
            "oversampled width k + p = {} exceeds c = {c}; clamping to {c}",
            width
        );
        width = c;
    }

    let mut rng = SeededRng::new(cfg.seed);
    // orthogonalizing the test matrix leaves its span unchanged and keeps V
    // orthonormal when q = 0
    let mut q = orthogonalize(&randn(c, width, &mut rng)?)?;
    let mut max_iters_seen = 0;
    let mut lambda = 0.0;

    let mut apply = |q: &DenseMatrix| -> Result<DenseMatrix> {
        // one data pass: Z = argmin ‖YQ - XZ‖² (+ λ‖Z‖²), returns Y^T X Z
        let target = spmm(y, q)?;
        let sol = ridge_lstsq_report(x, &target, &cfg.solver)?;
        lambda = sol.lambda;
        for (column, s) in sol.columns.iter().enumerate() {
            max_iters_seen = max_iters_seen.max(s.iterations);
            if !s.converged {
                return Err(Error::Convergence {
                    column,
                    iterations: s.iterations,
                    residual: s.relative_gradient,
                });
            }
        }
        spmm_t(y, &spmm(x, &sol.z)?)
    };

    for _ in 0..cfg.q {
        q = orthogonalize(&apply(&q)?)?;
        if q.cols() < cfg.k {
            return Err(Error::Rank {
                requested: cfg.k,
                achievable: q.cols(),
            });
        }
    }
    if q.cols() < cfg.k {
        return Err(Error::Rank {
            requested: cfg.k,
            achievable: q.cols(),
        });
    }

    let m = apply(&q)?;
    let f = gemm(&m, &m, true)?;
    let eig = sym_eig_topk(&f, cfg.k)?;
    let sigma: Vec<f64> = eig.values.iter().map(|l| l.sqrt()).collect();
    let v = gemm(&q, &eig.vectors, false)?;

    let diagnostics = EmbedDiagnostics {
        width,
        surviving_rank: q.cols(),
        data_passes: cfg.q + 1,
        max_solver_iterations: max_iters_seen,
        lambda,
    };
    Ok((Embedding::new(v, sigma)?, diagnostics))
}

/// Regression map `Z` (d x k) predicting the embedded labels `Y V` from `X`.
/// Row `x^T Z` is an example's predicted embedding.
pub fn embedding_regressor(data: &Dataset, emb: &Embedding, solver: &SolverConfig) -> Result<DenseMatrix> {
    if emb.c() != data.c() {
        return dim_err(format!(
            "embedding covers {} labels, dataset has {}",
            emb.c(),
            data.c()
        ));
    }
    let target = spmm(data.y(), emb.v())?;
    crate::linalg::ridge_lstsq(data.x(), &target, solver)
}
