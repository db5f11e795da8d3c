//! Label embeddings: the randomized partial-least-squares embedding, the
//! dense reference it is checked against, and the baseline embeddings.

mod baseline;
mod oracle;
mod rembrandt;
mod subspace;

pub use baseline::{cs_embed, pca_feature_embed};
pub use oracle::{exact_oracle, projector, ORACLE_SIZE_LIMIT};
pub use rembrandt::{embedding_regressor, rembrandt_embed, rembrandt_embed_detailed, EmbedDiagnostics};
pub use subspace::{max_principal_angle, principal_angles};

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::linalg::SolverConfig;
use crate::matrix::{gemm, DenseMatrix, SparseMatrix};

/// Paired features `X` (n x d) and labels `Y` (n x c).
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    x: SparseMatrix,
    y: SparseMatrix,
}

impl Dataset {
    /// Pairs features with labels. Every example must carry at least one label.
    pub fn new(x: SparseMatrix, y: SparseMatrix) -> Result<Self> {
        if x.rows() != y.rows() {
            return dim_err(format!(
                "features have {} rows but labels have {}",
                x.rows(),
                y.rows()
            ));
        }
        if y.cols() == 0 {
            return Err(Error::Validation("label space is empty (c = 0)".into()));
        }
        if let Some(i) = (0..y.rows()).find(|&i| y.row_nnz(i) == 0) {
            return Err(Error::Validation(format!("example {i} has no labels")));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &SparseMatrix {
        &self.x
    }

    pub fn y(&self) -> &SparseMatrix {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn d(&self) -> usize {
        self.x.cols()
    }

    pub fn c(&self) -> usize {
        self.y.cols()
    }

    /// Mean number of labels per example (`s`).
    pub fn avg_label_sparsity(&self) -> f64 {
        if self.n() == 0 {
            0.0
        } else {
            self.y.nnz() as f64 / self.n() as f64
        }
    }

    /// Rows `[0, at)` and `[at, n)`.
    pub fn split_at(&self, at: usize) -> (Dataset, Dataset) {
        let n = self.n();
        let at = at.min(n);
        (
            Dataset {
                x: self.x.slice_rows(0..at),
                y: self.y.slice_rows(0..at),
            },
            Dataset {
                x: self.x.slice_rows(at..n),
                y: self.y.slice_rows(at..n),
            },
        )
    }

    /// Copy with each label row scaled to unit Euclidean norm.
    pub fn with_normalized_labels(&self) -> Dataset {
        let rows: Vec<Vec<(usize, f64)>> = (0..self.y.rows())
            .map(|i| {
                let (idx, vals) = self.y.row(i);
                let norm = vals.iter().map(|v| v * v).sum::<f64>().sqrt();
                idx.iter().zip(vals).map(|(&j, &v)| (j, v / norm)).collect()
            })
            .collect();
        Dataset {
            x: self.x.clone(),
            y: SparseMatrix::from_rows(self.y.cols(), &rows).expect("rows already valid"),
        }
    }
}

/// Hyperparameters of the randomized embedding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbedConfig {
    /// Embedding dimension.
    pub k: usize,
    /// Oversampling columns beyond `k`.
    pub p: usize,
    /// Power iterations; the embedding makes `q + 1` passes over the data.
    pub q: usize,
    pub seed: u64,
    pub solver: SolverConfig,
}

impl EmbedConfig {
    pub const DEFAULT_OVERSAMPLING: usize = 20;
    pub const DEFAULT_POWER_ITERATIONS: usize = 1;

    pub fn new(k: usize) -> Self {
        Self {
            k,
            p: Self::DEFAULT_OVERSAMPLING,
            q: Self::DEFAULT_POWER_ITERATIONS,
            seed: 0,
            solver: SolverConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Validation("embedding dimension k must be at least 1".into()));
        }
        self.solver.validate()
    }
}

/// Orthonormal label embedding `V` (c x k) with its spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    v: DenseMatrix,
    sigma: Vec<f64>,
}

impl Embedding {
    /// Checks shapes and that `sigma` is nonnegative and nonincreasing.
    /// Orthonormality of `v` is reported by [`Embedding::orthonormality_defect`].
    pub fn new(v: DenseMatrix, sigma: Vec<f64>) -> Result<Self> {
        if v.cols() == 0 || v.rows() == 0 {
            return dim_err("embedding must have at least one label and one dimension");
        }
        if sigma.len() != v.cols() {
            return dim_err(format!(
                "{} sigma values for a {}-dimensional embedding",
                sigma.len(),
                v.cols()
            ));
        }
        if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::Validation("sigma values must be finite and >= 0".into()));
        }
        if sigma.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Validation("sigma values must be nonincreasing".into()));
        }
        Ok(Self { v, sigma })
    }

    pub fn v(&self) -> &DenseMatrix {
        &self.v
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Number of labels `c`.
    pub fn c(&self) -> usize {
        self.v.rows()
    }

    /// Embedding dimension `k`.
    pub fn k(&self) -> usize {
        self.v.cols()
    }

    /// `max |V^T V - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        gemm(&self.v, &self.v, true)
            .expect("V^T V conforms")
            .max_abs_diff(&DenseMatrix::identity(self.k()))
    }
}
