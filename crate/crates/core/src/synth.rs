//! Synthetic datasets with planted low-rank label structure.

use serde::{Deserialize, Serialize};

use crate::embed::{exact_oracle, Dataset};
use crate::error::{Error, Result};
use crate::matrix::{randn, spmm, DenseMatrix, SeededRng, SparseMatrix};

/// Parameters of a planted-model dataset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: usize,
    pub d: usize,
    pub c: usize,
    /// Rank of the planted score matrix `W0 = A B^T`.
    pub true_rank: usize,
    /// Probability that each positive label is replaced by a random other label.
    pub label_noise: f64,
    /// Positives per example; 1 gives a multiclass problem.
    pub labels_per_example: usize,
    /// Probability that a given feature is present in an example.
    pub feature_density: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(n: usize, d: usize, c: usize, true_rank: usize) -> Self {
        Self {
            n,
            d,
            c,
            true_rank,
            label_noise: 0.0,
            labels_per_example: 1,
            feature_density: 0.3,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Validation(m));
        if self.n < 2 || self.d == 0 || self.c == 0 {
            return fail(format!(
                "need n >= 2, d >= 1, c >= 1 (got n={}, d={}, c={})",
                self.n, self.d, self.c
            ));
        }
        if self.true_rank == 0 || self.true_rank > self.d.min(self.c) {
            return fail(format!(
                "true_rank must be in 1..=min(d, c) = {}, got {}",
                self.d.min(self.c),
                self.true_rank
            ));
        }
        if !(0.0..1.0).contains(&self.label_noise) {
            return fail(format!("label_noise must be in [0, 1), got {}", self.label_noise));
        }
        if self.labels_per_example == 0 || self.labels_per_example > self.c {
            return fail(format!(
                "labels_per_example must be in 1..=c, got {}",
                self.labels_per_example
            ));
        }
        if !(self.feature_density > 0.0 && self.feature_density <= 1.0) {
            return fail(format!(
                "feature_density must be in (0, 1], got {}",
                self.feature_density
            ));
        }
        Ok(())
    }
}

/// Sparse Gaussian features; every row gets at least one nonzero.
pub fn random_features(n: usize, d: usize, density: f64, rng: &mut SeededRng) -> Result<SparseMatrix> {
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let mut row = Vec::new();
        for j in 0..d {
            if rng.bernoulli(density) {
                row.push((j, rng.normal()));
            }
        }
        if row.is_empty() {
            row.push((rng.below(d), 1.0 + rng.uniform()));
        }
        rows.push(row);
    }
    SparseMatrix::from_rows(d, &rows)
}

/// Indices of the `m` largest entries, ties to the smaller index.
fn top_indices(scores: &[f64], m: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.truncate(m);
    idx
}

fn noisy_labels(scores: &DenseMatrix, m: usize, noise: f64, rng: &mut SeededRng) -> Result<SparseMatrix> {
    let c = scores.cols();
    let mut rows = Vec::with_capacity(scores.rows());
    for i in 0..scores.rows() {
        let mut labels = top_indices(&scores.row(i), m);
        for p in 0..labels.len() {
            if noise > 0.0 && rng.bernoulli(noise) && m < c {
                // uniform over labels not already positive
                loop {
                    let cand = rng.below(c);
                    if !labels.contains(&cand) {
                        labels[p] = cand;
                        break;
                    }
                }
            }
        }
        rows.push(labels.into_iter().map(|j| (j, 1.0)).collect());
    }
    SparseMatrix::from_rows(c, &rows)
}

/// Draws a planted-model dataset and splits it 80/20 into train and test.
///
/// Scores are `X A B^T` with Gaussian `A` (d x r) and `B` (c x r); each example's
/// top `labels_per_example` scores become its positives, and each positive is
/// swapped for a uniformly chosen other label with probability `label_noise`.
pub fn make_synthetic(spec: &SynthSpec) -> Result<(Dataset, Dataset)> {
    make_synthetic_with_truth(spec).map(|(train, test, _)| (train, test))
}

/// The planted factors behind a synthetic dataset: scores are `X A B^T`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedModel {
    /// d x r
    pub a: DenseMatrix,
    /// c x r
    pub b: DenseMatrix,
}

/// [`make_synthetic`], also returning the planted factors.
pub fn make_synthetic_with_truth(spec: &SynthSpec) -> Result<(Dataset, Dataset, PlantedModel)> {
    spec.validate()?;
    let mut rng = SeededRng::new(spec.seed);
    let x = random_features(spec.n, spec.d, spec.feature_density, &mut rng)?;
    let a = randn(spec.d, spec.true_rank, &mut rng)?;
    let b = randn(spec.c, spec.true_rank, &mut rng)?;
    let scores = crate::matrix::gemm(&spmm(&x, &a)?, &b.transpose(), false)?;
    let y = noisy_labels(&scores, spec.labels_per_example, spec.label_noise, &mut rng)?;
    let data = Dataset::new(x, y)?;
    let n_train = (spec.n * 4) / 5;
    let (train, test) = data.split_at(n_train.max(1));
    Ok((train, test, PlantedModel { a, b }))
}

/// A small instance whose `Y^T Π Y` has relative eigengap at least `min_gap`
/// between eigenvalues `k` and `k + 1`, found by seeded rejection sampling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GappedSpec {
    pub n: usize,
    pub d: usize,
    pub c: usize,
    pub k: usize,
    pub min_gap: f64,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct GappedInstance {
    pub data: Dataset,
    /// Relative gap `(λ_k - λ_{k+1}) / λ_k` actually achieved.
    pub gap: f64,
    pub attempts: usize,
}

const MAX_GAP_ATTEMPTS: usize = 500;

pub fn gapped_instance(spec: &GappedSpec) -> Result<GappedInstance> {
    if spec.k == 0 || spec.k >= spec.c.min(spec.d) {
        return Err(Error::Validation(format!(
            "gapped instance needs 1 <= k < min(c, d), got k = {}",
            spec.k
        )));
    }
    let mut rng = SeededRng::new(spec.seed);
    for attempt in 1..=MAX_GAP_ATTEMPTS {
        let x = random_features(spec.n, spec.d, 0.5, &mut rng)?;
        let a = randn(spec.d, spec.k, &mut rng)?;
        let b = randn(spec.c, spec.k, &mut rng)?;
        let mut scores = crate::matrix::gemm(&spmm(&x, &a)?, &b.transpose(), false)?.into_vec();
        for s in scores.iter_mut() {
            *s += 0.5 * rng.normal();
        }
        let scores = DenseMatrix::from_col_major(spec.n, spec.c, scores)?;
        let y = noisy_labels(&scores, 2.min(spec.c), 0.0, &mut rng)?;
        let data = Dataset::new(x, y)?;
        let sigma = exact_oracle(&data, spec.k + 1)?.sigma().to_vec();
        let (hi, lo) = (sigma[spec.k - 1], sigma[spec.k]);
        if hi > 0.0 && (hi - lo) / hi >= spec.min_gap {
            return Ok(GappedInstance {
                data,
                gap: (hi - lo) / hi,
                attempts: attempt,
            });
        }
    }
    Err(Error::Validation(format!(
        "no instance with relative gap >= {} in {MAX_GAP_ATTEMPTS} attempts",
        spec.min_gap
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_data() {
        let spec = SynthSpec {
            seed: 4,
            label_noise: 0.1,
            ..SynthSpec::new(50, 8, 6, 2)
        };
        let (a, b) = make_synthetic(&spec).unwrap();
        let (c, d) = make_synthetic(&spec).unwrap();
        assert_eq!(a, c);
        assert_eq!(b, d);
        assert_eq!((a.n(), b.n()), (40, 10));
    }

    #[test]
    fn single_label_rows() {
        let (train, test) = make_synthetic(&SynthSpec::new(30, 5, 4, 2)).unwrap();
        for data in [&train, &test] {
            assert!((0..data.n()).all(|i| data.y().row_nnz(i) == 1));
        }
    }

    #[test]
    fn multilabel_rows_have_fixed_count() {
        let spec = SynthSpec {
            labels_per_example: 3,
            label_noise: 0.3,
            ..SynthSpec::new(40, 6, 10, 2)
        };
        let (train, _) = make_synthetic(&spec).unwrap();
        assert!((0..train.n()).all(|i| train.y().row_nnz(i) == 3));
    }

    #[test]
    fn spec_violations_are_rejected() {
        assert!(make_synthetic(&SynthSpec::new(30, 5, 4, 5)).is_err());
        let noisy = SynthSpec {
            label_noise: 1.0,
            ..SynthSpec::new(30, 5, 4, 2)
        };
        assert!(matches!(make_synthetic(&noisy), Err(Error::Validation(_))));
    }

    #[test]
    fn gapped_instances_meet_the_gap() {
        let inst = gapped_instance(&GappedSpec {
            n: 40,
            d: 12,
            c: 9,
            k: 3,
            min_gap: 0.1,
            seed: 1,
        })
        .unwrap();
        assert!(inst.gap >= 0.1);
        assert_eq!(inst.data.c(), 9);
    }
}
