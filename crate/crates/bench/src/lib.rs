//! Seeded inputs shared by the benchmarks.

use rembed_core::synth::random_features;
use rembed_core::{Dataset, SeededRng, SparseMatrix};

/// Sparse features with roughly `nnz_per_row` entries per row and one label
/// per row drawn from the first `active` of `c` classes.
pub fn dataset(n: usize, d: usize, c: usize, active: usize, nnz_per_row: usize, seed: u64) -> Dataset {
    let mut rng = SeededRng::new(seed);
    let density = (nnz_per_row as f64 / d as f64).min(1.0);
    let x = random_features(n, d, density, &mut rng).expect("valid shape");
    let rows: Vec<Vec<(usize, f64)>> = (0..n).map(|_| vec![(rng.below(active.min(c)), 1.0)]).collect();
    let y = SparseMatrix::from_rows(c, &rows).expect("labels in range");
    Dataset::new(x, y).expect("consistent rows")
}
