//! Ridge least squares, orthogonalization and the small symmetric
//! eigensolver that the embedding composes.

mod eig;
mod lsqr;
mod orth;

pub use eig::{sym_eig_topk, EigResult, SYMMETRY_TOLERANCE};
pub use lsqr::{
    ridge_gradient_norm, ridge_lstsq, ridge_lstsq_report, ridge_objective, ColumnStats, Ridge,
    RidgeSolution, SolverConfig,
};
pub use orth::{orthogonalize, DROP_TOLERANCE};
