use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::matrix::{dot, norm2, DenseMatrix, SparseMatrix};

/// How the ridge penalty `λ` on `‖Z‖²_F` is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ridge {
    /// `λ = factor * mean_i ‖x_i‖²`, resolved against the design matrix.
    Relative(f64),
    /// A fixed `λ`. `Absolute(0.0)` is the plain least-squares objective.
    Absolute(f64),
}

impl Ridge {
    pub fn none() -> Self {
        Ridge::Absolute(0.0)
    }

    pub fn resolve(&self, x: &SparseMatrix) -> f64 {
        match *self {
            Ridge::Absolute(l) => l,
            Ridge::Relative(f) => {
                if x.rows() == 0 {
                    0.0
                } else {
                    f * x.frobenius_norm_sq() / x.rows() as f64
                }
            }
        }
    }
}

/// Settings for the multi-right-hand-side ridge solve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub ridge: Ridge,
    /// Stop once `‖X^T(Xz - b) + λz‖ <= tol * ‖X^T b‖` for every column.
    pub tol: f64,
    /// LSQR iterations allowed per column, restarts included.
    pub max_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            ridge: Ridge::Relative(1e-6),
            tol: 1e-10,
            max_iters: 1000,
        }
    }
}

impl SolverConfig {
    pub fn with_ridge(mut self, ridge: Ridge) -> Self {
        self.ridge = ridge;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let lambda_ok = match self.ridge {
            Ridge::Relative(v) | Ridge::Absolute(v) => v.is_finite() && v >= 0.0,
        };
        if !lambda_ok {
            return Err(Error::Validation("ridge lambda must be finite and >= 0".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Validation("solver tol must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Validation("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-column outcome of a ridge solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ColumnStats {
    pub iterations: usize,
    pub restarts: usize,
    /// `‖X^T(Xz - b) + λz‖ / ‖X^T b‖`, evaluated explicitly at the returned `z`.
    pub relative_gradient: f64,
    pub converged: bool,
}

/// Ridge solution together with per-column diagnostics.
#[derive(Clone, Debug)]
pub struct RidgeSolution {
    pub z: DenseMatrix,
    pub lambda: f64,
    pub columns: Vec<ColumnStats>,
}

impl RidgeSolution {
    pub fn converged(&self) -> bool {
        self.columns.iter().all(|c| c.converged)
    }
}

/// Solves `min_Z ‖B - XZ‖²_F + λ‖Z‖²_F` column by column with LSQR.
///
/// Fails with [`Error::Convergence`] if any column misses the gradient
/// tolerance within `max_iters`.
pub fn ridge_lstsq(x: &SparseMatrix, b: &DenseMatrix, cfg: &SolverConfig) -> Result<DenseMatrix> {
    let sol = ridge_lstsq_report(x, b, cfg)?;
    if let Some((column, stats)) = sol.columns.iter().enumerate().find(|(_, c)| !c.converged) {
        return Err(Error::Convergence {
            column,
            iterations: stats.iterations,
            residual: stats.relative_gradient,
        });
    }
    Ok(sol.z)
}

/// Like [`ridge_lstsq`] but returns the iterate reached even when a column
/// did not converge.
pub fn ridge_lstsq_report(
    x: &SparseMatrix,
    b: &DenseMatrix,
    cfg: &SolverConfig,
) -> Result<RidgeSolution> {
    cfg.validate()?;
    if x.rows() != b.rows() {
        return dim_err(format!(
            "ridge_lstsq: X has {} rows, B has {}",
            x.rows(),
            b.rows()
        ));
    }
    let lambda = cfg.ridge.resolve(x);
    let op = Augmented::new(x, lambda);
    let mut z = DenseMatrix::zeros(x.cols(), b.cols());
    let mut columns = Vec::with_capacity(b.cols());
    for j in 0..b.cols() {
        let (sol, stats) = solve_column(&op, b.col(j), cfg);
        z.col_mut(j).copy_from_slice(&sol);
        columns.push(stats);
    }
    Ok(RidgeSolution {
        z: z.checked()?,
        lambda,
        columns,
    })
}

/// The stacked operator `[X; sqrt(λ) I]`, so that the ridge problem is an
/// ordinary least-squares problem and warm restarts need no special casing.
struct Augmented<'a> {
    x: &'a SparseMatrix,
    sqrt_lambda: f64,
}

impl<'a> Augmented<'a> {
    fn new(x: &'a SparseMatrix, lambda: f64) -> Self {
        Self {
            x,
            sqrt_lambda: lambda.sqrt(),
        }
    }

    fn out_len(&self) -> usize {
        if self.sqrt_lambda > 0.0 {
            self.x.rows() + self.x.cols()
        } else {
            self.x.rows()
        }
    }

    fn apply(&self, v: &[f64], u: &mut [f64]) {
        let n = self.x.rows();
        self.x.matvec_into(v, &mut u[..n]);
        if self.sqrt_lambda > 0.0 {
            for (ui, vi) in u[n..].iter_mut().zip(v) {
                *ui = self.sqrt_lambda * vi;
            }
        }
    }

    fn apply_t(&self, u: &[f64], v: &mut [f64]) {
        let n = self.x.rows();
        if self.sqrt_lambda > 0.0 {
            for (vi, ui) in v.iter_mut().zip(&u[n..]) {
                *vi = self.sqrt_lambda * ui;
            }
        } else {
            v.iter_mut().for_each(|e| *e = 0.0);
        }
        self.x.matvec_t_add(&u[..n], v);
    }

    /// `rhs - A z` for the augmented right-hand side `[b; 0]`.
    fn residual(&self, b: &[f64], z: &[f64], r: &mut [f64]) {
        self.apply(z, r);
        let n = self.x.rows();
        for (ri, bi) in r[..n].iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        for ri in r[n..].iter_mut() {
            *ri = -*ri;
        }
    }
}

fn solve_column(op: &Augmented<'_>, b: &[f64], cfg: &SolverConfig) -> (Vec<f64>, ColumnStats) {
    let d = op.x.cols();
    let m = op.out_len();
    let mut z = vec![0.0; d];

    let mut xtb = vec![0.0; d];
    op.x.matvec_t_add(b, &mut xtb);
    let reference = norm2(&xtb);
    if reference == 0.0 {
        // z = 0 already satisfies the normal equations
        return (
            z,
            ColumnStats {
                iterations: 0,
                restarts: 0,
                relative_gradient: 0.0,
                converged: true,
            },
        );
    }
    let target = cfg.tol * reference;

    let mut r = vec![0.0; m];
    let mut grad = vec![0.0; d];
    let mut iterations = 0;
    let mut restarts: usize = 0;
    let mut gnorm;
    loop {
        // gradient of the objective at z is -A^T r
        op.residual(b, &z, &mut r);
        op.apply_t(&r, &mut grad);
        gnorm = norm2(&grad);
        if gnorm <= target || iterations >= cfg.max_iters {
            break;
        }
        let budget = cfg.max_iters - iterations;
        let used = lsqr_pass(op, &mut r, &mut z, target, budget);
        iterations += used;
        if used == 0 {
            break;
        }
        restarts += 1;
    }
    (
        z,
        ColumnStats {
            iterations,
            restarts: restarts.saturating_sub(1),
            relative_gradient: gnorm / reference,
            converged: gnorm <= target,
        },
    )
}

/// One LSQR run on `min ‖u - A dz‖`, accumulating `dz` into `z`. `u` holds the
/// current residual on entry and is overwritten. Returns the number of
/// iterations taken; stops once the estimate of `‖A^T r‖` drops below `target`.
fn lsqr_pass(op: &Augmented<'_>, u: &mut [f64], z: &mut [f64], target: f64, budget: usize) -> usize {
    let d = z.len();
    let mut beta = norm2(u);
    if beta == 0.0 {
        return 0;
    }
    scale(u, 1.0 / beta);
    let mut v = vec![0.0; d];
    op.apply_t(u, &mut v);
    let mut alpha = norm2(&v);
    if alpha == 0.0 {
        return 0;
    }
    scale(&mut v, 1.0 / alpha);
    let mut w = v.clone();
    let mut phibar = beta;
    let mut rhobar = alpha;

    let mut av = vec![0.0; u.len()];
    let mut atu = vec![0.0; d];
    let mut iters = 0;
    while iters < budget {
        iters += 1;

        // bidiagonalization step
        op.apply(&v, &mut av);
        for (ui, ai) in u.iter_mut().zip(&av) {
            *ui = ai - alpha * *ui;
        }
        beta = norm2(u);
        if beta > 0.0 {
            scale(u, 1.0 / beta);
            op.apply_t(u, &mut atu);
            for (vi, ai) in v.iter_mut().zip(&atu) {
                *vi = ai - beta * *vi;
            }
            alpha = norm2(&v);
            if alpha > 0.0 {
                scale(&mut v, 1.0 / alpha);
            }
        } else {
            alpha = 0.0;
        }

        // plane rotation eliminating beta
        let rho = rhobar.hypot(beta);
        let c = rhobar / rho;
        let s = beta / rho;
        let theta = s * alpha;
        rhobar = -c * alpha;
        let phi = c * phibar;
        phibar *= s;

        let t1 = phi / rho;
        let t2 = -theta / rho;
        for ((zi, wi), vi) in z.iter_mut().zip(w.iter_mut()).zip(&v) {
            *zi += t1 * *wi;
            *wi = vi + t2 * *wi;
        }

        let normal_residual = phibar * alpha * c.abs();
        if normal_residual <= target || alpha == 0.0 || beta == 0.0 {
            break;
        }
    }
    iters
}

#[inline]
fn scale(x: &mut [f64], s: f64) {
    x.iter_mut().for_each(|e| *e *= s);
}

/// `‖X^T(XZ - B) + λZ‖_F`, evaluated directly.
pub fn ridge_gradient_norm(x: &SparseMatrix, b: &DenseMatrix, z: &DenseMatrix, lambda: f64) -> f64 {
    let mut total = 0.0;
    let mut r = vec![0.0; x.rows()];
    let mut g = vec![0.0; x.cols()];
    for j in 0..b.cols() {
        x.matvec_into(z.col(j), &mut r);
        for (ri, bi) in r.iter_mut().zip(b.col(j)) {
            *ri -= bi;
        }
        for (gi, zi) in g.iter_mut().zip(z.col(j)) {
            *gi = lambda * zi;
        }
        x.matvec_t_add(&r, &mut g);
        total += dot(&g, &g);
    }
    total.sqrt()
}

/// `‖B - XZ‖²_F + λ‖Z‖²_F`.
pub fn ridge_objective(x: &SparseMatrix, b: &DenseMatrix, z: &DenseMatrix, lambda: f64) -> f64 {
    let mut total = 0.0;
    let mut r = vec![0.0; x.rows()];
    for j in 0..b.cols() {
        x.matvec_into(z.col(j), &mut r);
        total += r.iter().zip(b.col(j)).map(|(a, b)| (b - a).powi(2)).sum::<f64>();
        total += lambda * dot(z.col(j), z.col(j));
    }
    total
}
