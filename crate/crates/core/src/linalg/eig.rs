use crate::error::{dim_err, Error, Result};
use crate::matrix::DenseMatrix;

/// Inputs with `max |F - F^T|` above this (scaled by `max(1, max |F|)`) are rejected.
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;

const MAX_SWEEPS: usize = 64;

/// Leading eigenpairs of a small symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct EigResult {
    /// Orthonormal eigenvectors, one per column, in the order of `values`.
    pub vectors: DenseMatrix,
    /// Eigenvalues, nonincreasing, with negatives clamped to zero.
    pub values: Vec<f64>,
    /// The same eigenvalues before clamping.
    pub raw_values: Vec<f64>,
}

/// Top-`k` eigenpairs of the symmetric matrix `f`.
///
/// `f` is symmetrized as `(F + F^T)/2` and fully diagonalized by cyclic Jacobi
/// rotations; eigenpairs are then sorted by decreasing eigenvalue and truncated.
/// Jacobi is quadratically convergent and keeps small eigenvalues accurate,
/// which matters because the callers take square roots of them.
pub fn sym_eig_topk(f: &DenseMatrix, k: usize) -> Result<EigResult> {
    let n = f.rows();
    if f.cols() != n {
        return dim_err(format!("eigendecomposition needs a square matrix, got {:?}", f.shape()));
    }
    if k > n {
        return dim_err(format!("requested {k} eigenpairs from a {n}x{n} matrix"));
    }
    let scale = f.max_abs().max(1.0);
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (f.get(i, j), f.get(j, i));
            if (x - y).abs() > SYMMETRY_TOLERANCE * scale {
                return Err(Error::Validation(format!(
                    "matrix is not symmetric: |F[{i},{j}] - F[{j},{i}]| = {:e}",
                    (x - y).abs()
                )));
            }
            a[i * n + j] = 0.5 * (x + y);
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    jacobi(&mut a, &mut v, n);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| a[q * n + q].total_cmp(&a[p * n + p]).then(p.cmp(&q)));
    order.truncate(k);

    let raw_values: Vec<f64> = order.iter().map(|&p| a[p * n + p]).collect();
    let values = raw_values.iter().map(|&l| l.max(0.0)).collect();
    let mut vectors = DenseMatrix::zeros(n, k);
    for (c, &p) in order.iter().enumerate() {
        for r in 0..n {
            // v is row-major with eigenvector p stored in column p
            vectors.set(r, c, v[r * n + p]);
        }
    }
    Ok(EigResult {
        vectors: vectors.checked()?,
        values,
        raw_values,
    })
}

/// Cyclic Jacobi on the row-major symmetric `a`; accumulates rotations into `v`.
fn jacobi(a: &mut [f64], v: &mut [f64], n: usize) {
    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if frob == 0.0 {
        return;
    }
    // off-diagonal entries this small relative to the whole matrix are noise
    let floor = frob * 1e-36;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let (app, aqq) = (a[p * n + p], a[q * n + q]);
                if apq.abs() <= floor
                    || apq.abs() <= 0.25 * f64::EPSILON * (app.abs() * aqq.abs()).sqrt()
                {
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a[r * n + p];
                        let arq = a[r * n + q];
                        let np = c * arp - s * arq;
                        let nq = s * arp + c * arq;
                        a[r * n + p] = np;
                        a[p * n + r] = np;
                        a[r * n + q] = nq;
                        a[q * n + r] = nq;
                    }
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = c * vrp - s * vrq;
                    v[r * n + q] = s * vrp + c * vrq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
}
