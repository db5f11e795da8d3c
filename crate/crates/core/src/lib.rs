//! Randomized partial-least-squares label embeddings for very large output
//! spaces, plus the dense reference, baselines and a small train/decode/evaluate
//! pipeline built on top.
//!
//! The crate is organized bottom-up:
//!
//! * [`matrix`]: CSR and column-major dense matrices, the seeded random stream
//!   and the sparse/dense products.
//! * [`linalg`]: ridge least squares (LSQR), orthogonalization and the small
//!   symmetric eigensolver.
//! * [`embed`]: the randomized label embedding, its dense oracle, the random
//!   and PCA baselines, and principal-angle comparisons.
//! * [`downstream`]: decoders on embedded representations and the metrics.
//! * [`synth`]: planted-model datasets for tests and experiments.

pub mod downstream;
pub mod embed;
pub mod error;
pub mod linalg;
pub mod matrix;
pub mod synth;

pub use embed::{Dataset, EmbedConfig, Embedding};
pub use error::{Error, Result};
pub use linalg::{Ridge, SolverConfig};
pub use matrix::{DenseMatrix, SeededRng, SparseMatrix};
