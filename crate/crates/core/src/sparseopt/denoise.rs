use super::iterative::step_constant;
use super::{svt, DenoiseConfig, MeasurementOperator};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::{norm2, Scalar};

/// Output of the nuclear-norm solvers.
#[derive(Clone, Debug)]
pub struct DenoiseOutcome<T> {
    pub matrix: DenseMatrix<T>,
    /// Prox-gradient iterations, summed over Bregman rounds where used.
    pub iterations: usize,
    pub outer_iterations: usize,
    pub converged: bool,
    pub projections: usize,
    pub step_a: T,
}

/// Default projection count `min(mn, 4(m+n)(n−1))`.
pub fn default_projections(m: usize, n: usize) -> usize {
    (m * n).min(4 * (m + n) * n.saturating_sub(1).max(1))
}

struct ProxRun<T> {
    x: Vec<T>,
    iterations: usize,
    converged: bool,
}

/// Prox-gradient on `‖y − A vec(X)‖² + λ‖X‖_*` from `x`, `vec` column-stacked.
#[allow(clippy::too_many_arguments)]
fn nuclear_prox_grad<T: Scalar>(
    op: &MeasurementOperator<T>,
    y: &[T],
    (m, n): (usize, usize),
    mut x: Vec<T>,
    a: T,
    tau: T,
    max_iter: usize,
    tol: T,
) -> Result<ProxRun<T>> {
    for k in 0..max_iter {
        let ax = op.apply(&x);
        let r: Vec<T> = y.iter().zip(&ax).map(|(&p, &q)| p - q).collect();
        let g = op.adjoint(&r);
        let q: Vec<T> = x.iter().zip(&g).map(|(&xi, &gi)| xi + gi / a).collect();
        let next = svt(&DenseMatrix::from_col_major(m, n, &q)?, tau)?.to_col_major();
        let d: Vec<T> = next.iter().zip(&x).map(|(&p, &q)| p - q).collect();
        let scale = norm2(&x).max(T::min_positive_value());
        let done = norm2(&d) <= tol * scale;
        x = next;
        if done {
            return Ok(ProxRun { x, iterations: k + 1, converged: true });
        }
    }
    Ok(ProxRun { x, iterations: max_iter, converged: false })
}

/// Rank denoising by random projections and singular value thresholding.
///
/// `B` is normalised to unit Frobenius norm, column-stacked and measured with a
/// seeded Gaussian `R` whose rows are orthonormalised (the identity when
/// `p = m·n`); the prox-gradient loop starts from `vec(B)` and runs at most
/// `max_inner` iterations. The result is rescaled back.
pub fn matrix_denoise<T: Scalar>(b: &DenseMatrix<T>, cfg: &DenoiseConfig<T>) -> Result<DenoiseOutcome<T>> {
    cfg.validate()?;
    if !b.is_finite() {
        return Err(Error::NonFinite("matrix to denoise"));
    }
    let (m, n) = b.shape();
    let mn = m * n;
    let p = cfg.projections_p.unwrap_or_else(|| default_projections(m, n));
    if p > mn {
        return Err(Error::Invalid(format!("projections_p = {p} exceeds m·n = {mn}")));
    }
    let fro = b.frobenius();
    if fro == T::zero() {
        return Ok(DenoiseOutcome {
            matrix: b.clone(),
            iterations: 0,
            outer_iterations: 0,
            converged: true,
            projections: p,
            step_a: T::zero(),
        });
    }
    let b0: Vec<T> = b.to_col_major().into_iter().map(|v| v / fro).collect();
    // a square orthonormal R has RᵀR = I, so the identity gives the same iterates
    let r_op = if p == mn {
        MeasurementOperator::sampling(mn, (0..mn).collect())?
    } else {
        MeasurementOperator::orthonormal_gaussian(p, mn, cfg.seed)?
    };
    let r = r_op.apply(&b0);
    let a = step_constant(&r_op, cfg);
    let run = nuclear_prox_grad(&r_op, &r, (m, n), b0, a, cfg.threshold(a), cfg.max_inner, cfg.tol)?;
    Ok(DenoiseOutcome {
        matrix: DenseMatrix::from_col_major(m, n, &run.x)?.scale(fro),
        iterations: run.iterations,
        outer_iterations: 1,
        converged: run.converged,
        projections: p,
        step_a: a,
    })
}

/// Low-rank recovery from linear measurements `y = A vec(X)` with Bregman
/// add-back around the nuclear prox-gradient loop.
///
/// The inner loop stops on relative change `tol`; the add-back loop stops once
/// the relative measurement residual is at most `√tol`, since the residual of
/// a nuclear-norm constrained problem typically decays only like `1/k`.
pub fn nuclear_bregman<T: Scalar>(
    op: &MeasurementOperator<T>,
    y: &[T],
    shape: (usize, usize),
    cfg: &DenoiseConfig<T>,
) -> Result<DenoiseOutcome<T>> {
    cfg.validate()?;
    let (m, n) = shape;
    if op.in_dim() != m * n || y.len() != op.out_dim() {
        return Err(Error::Dimension("operator does not match matrix shape or data".into()));
    }
    let scale = norm2(y);
    let a = step_constant(op, cfg);
    let mut out = DenoiseOutcome {
        matrix: DenseMatrix::zeros(m, n),
        iterations: 0,
        outer_iterations: 0,
        converged: true,
        projections: op.out_dim(),
        step_a: a,
    };
    if scale == T::zero() {
        return Ok(out);
    }
    out.converged = false;
    let y: Vec<T> = y.iter().map(|&v| v / scale).collect();
    let mut yk = y.clone();
    let mut x = vec![T::zero(); m * n];
    let tau = cfg.threshold(a);
    let outer_tol = cfg.tol.sqrt();
    for k in 0..cfg.max_outer {
        let run = nuclear_prox_grad(op, &yk, shape, x, a, tau, cfg.max_inner, cfg.tol)?;
        x = run.x;
        out.iterations += run.iterations;
        out.outer_iterations = k + 1;
        let ax = op.apply(&x);
        let r: Vec<T> = y.iter().zip(&ax).map(|(&p, &q)| p - q).collect();
        if norm2(&r) <= outer_tol * norm2(&y) {
            out.converged = true;
            break;
        }
        yk.iter_mut().zip(&r).for_each(|(v, &ri)| *v += ri);
    }
    out.matrix = DenseMatrix::from_col_major(m, n, &x)?.scale(scale);
    Ok(out)
}
