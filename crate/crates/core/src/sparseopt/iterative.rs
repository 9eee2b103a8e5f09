use super::{soft_threshold, DenoiseConfig, MeasurementOperator};
use crate::error::{Error, Result};
use crate::scalar::{norm2, Scalar};

/// One Landweber step `x + (1/a)·Aᵀ(y − A x)`.
pub fn landweber_step<T: Scalar>(op: &MeasurementOperator<T>, y: &[T], x: &[T], a: T) -> Vec<T> {
    let ax = op.apply(x);
    let r: Vec<T> = y.iter().zip(&ax).map(|(&yi, &v)| yi - v).collect();
    let g = op.adjoint(&r);
    x.iter().zip(&g).map(|(&xi, &gi)| xi + gi / a).collect()
}

/// Result of an iterative L1 solve.
#[derive(Clone, Debug)]
pub struct SolveOutcome<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
    /// `‖y − A x‖² + λ‖x‖₁` after each iteration.
    pub objective: Vec<T>,
}

pub(crate) fn step_constant<T: Scalar>(op: &MeasurementOperator<T>, cfg: &DenoiseConfig<T>) -> T {
    cfg.step_a.unwrap_or_else(|| {
        let l = op.lambda_max();
        if l > T::zero() {
            T::lit(1.01) * l
        } else {
            T::one()
        }
    })
}

fn check_dims<T: Scalar>(op: &MeasurementOperator<T>, y: &[T]) -> Result<()> {
    if y.len() != op.out_dim() {
        return Err(Error::Dimension(format!("{} measurements for an operator with {} outputs", y.len(), op.out_dim())));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("measurements"));
    }
    Ok(())
}

fn objective<T: Scalar>(op: &MeasurementOperator<T>, y: &[T], x: &[T], lambda: T) -> T {
    let ax = op.apply(x);
    let r: T = y.iter().zip(&ax).map(|(&a, &b)| (a - b) * (a - b)).sum();
    r + lambda * x.iter().map(|v| v.abs()).sum::<T>()
}

/// Iterative soft thresholding from `x = 0`.
///
/// Stops when `‖Δx‖ ≤ tol·max(1, ‖x‖)` or after `max_inner` iterations.
pub fn ista_solve<T: Scalar>(op: &MeasurementOperator<T>, y: &[T], cfg: &DenoiseConfig<T>) -> Result<SolveOutcome<T>> {
    cfg.validate()?;
    check_dims(op, y)?;
    let a = step_constant(op, cfg);
    Ok(ista_from(op, y, vec![T::zero(); op.in_dim()], a, cfg))
}

pub(crate) fn ista_from<T: Scalar>(
    op: &MeasurementOperator<T>,
    y: &[T],
    mut x: Vec<T>,
    a: T,
    cfg: &DenoiseConfig<T>,
) -> SolveOutcome<T> {
    let thr = cfg.threshold(a);
    let lambda = cfg.lambda();
    let mut out = SolveOutcome { x: Vec::new(), iterations: 0, converged: false, objective: Vec::new() };
    for k in 0..cfg.max_inner {
        let next = soft_threshold(&landweber_step(op, y, &x, a), thr);
        let d: Vec<T> = next.iter().zip(&x).map(|(&p, &q)| p - q).collect();
        let done = norm2(&d) <= cfg.tol * norm2(&x).max(T::one());
        x = next;
        out.objective.push(objective(op, y, &x, lambda));
        out.iterations = k + 1;
        if done {
            out.converged = true;
            break;
        }
    }
    out.x = x;
    out
}

/// Result of the Bregman add-back loop.
#[derive(Clone, Debug)]
pub struct BregmanOutcome<T> {
    pub x: Vec<T>,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub converged: bool,
    /// Residual failed to improve over five consecutive rounds.
    pub stagnated: bool,
    pub residual: T,
}

const STALL_ROUNDS: usize = 5;

/// Bregman iteration: repeated ISTA solves with the residual added back to
/// the data, driving `A x = y` to a hard constraint.
pub fn bregman_solve<T: Scalar>(op: &MeasurementOperator<T>, y: &[T], cfg: &DenoiseConfig<T>) -> Result<BregmanOutcome<T>> {
    cfg.validate()?;
    check_dims(op, y)?;
    let a = step_constant(op, cfg);
    let ynorm = norm2(y);
    let mut yk = y.to_vec();
    let mut x = vec![T::zero(); op.in_dim()];
    let mut out = BregmanOutcome {
        x: Vec::new(),
        outer_iterations: 0,
        inner_iterations: 0,
        converged: false,
        stagnated: false,
        residual: ynorm,
    };
    if ynorm == T::zero() {
        out.x = x;
        out.converged = true;
        return Ok(out);
    }
    let mut best = T::infinity();
    let mut stall = 0;
    for k in 0..cfg.max_outer {
        let inner = ista_from(op, &yk, x, a, cfg);
        x = inner.x;
        out.inner_iterations += inner.iterations;
        out.outer_iterations = k + 1;
        let ax = op.apply(&x);
        let r: Vec<T> = y.iter().zip(&ax).map(|(&a, &b)| a - b).collect();
        out.residual = norm2(&r);
        if out.residual <= cfg.tol * ynorm {
            out.converged = true;
            break;
        }
        if out.residual < best {
            best = out.residual;
            stall = 0;
        } else {
            stall += 1;
            if stall >= STALL_ROUNDS {
                out.stagnated = true;
                break;
            }
        }
        yk.iter_mut().zip(&r).for_each(|(v, &ri)| *v += ri);
    }
    out.x = x;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    #[test]
    fn landweber_examples() {
        let id = MeasurementOperator::dense(DenseMatrix::<f64>::identity(2));
        assert_eq!(landweber_step(&id, &[3.0, -1.0], &[0.0, 0.0], 1.0), vec![3.0, -1.0]);
        let two = MeasurementOperator::dense(DenseMatrix::new(1, 1, vec![2.0]).unwrap());
        assert_eq!(landweber_step(&two, &[4.0], &[0.0], 4.0), vec![2.0]);
    }

    #[test]
    fn ista_examples() {
        let id = MeasurementOperator::dense(DenseMatrix::<f64>::identity(2));
        // 1/(2·a·mu) = 1 with a = 1
        let cfg = DenoiseConfig { mu: 0.5, step_a: Some(1.0), ..DenoiseConfig::default() };
        let out = ista_solve(&id, &[3.0, 0.1], &cfg).unwrap();
        assert!(out.converged);
        assert_eq!(out.x, vec![2.0, 0.0]);
        let zero = ista_solve(&id, &[0.0, 0.0], &cfg).unwrap();
        assert_eq!(zero.x, vec![0.0, 0.0]);
    }

    #[test]
    fn bregman_zero_data() {
        let id = MeasurementOperator::dense(DenseMatrix::<f64>::identity(3));
        let out = bregman_solve(&id, &[0.0; 3], &DenoiseConfig::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.outer_iterations, 0);
        assert_eq!(out.x, vec![0.0; 3]);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let id = MeasurementOperator::dense(DenseMatrix::<f64>::identity(3));
        assert!(ista_solve(&id, &[1.0], &DenoiseConfig::default()).is_err());
    }
}
