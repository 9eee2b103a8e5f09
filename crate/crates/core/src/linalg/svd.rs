use super::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::{dot, norm2, Scalar};

const MAX_SWEEPS: usize = 100;

/// Thin singular value decomposition `A = U diag(sigma) Vt`.
///
/// For an `m x n` input with `k = min(m, n)`, `u` is `m x k`, `vt` is `k x n`.
#[derive(Clone, Debug)]
pub struct SvdResult<T> {
    pub u: DenseMatrix<T>,
    pub sigma: Vec<T>,
    pub vt: DenseMatrix<T>,
}

impl<T: Scalar> SvdResult<T> {
    /// Right singular vectors as columns.
    pub fn v(&self) -> DenseMatrix<T> {
        self.vt.transpose()
    }

    pub fn reconstruct(&self) -> DenseMatrix<T> {
        let us = DenseMatrix::from_fn(self.u.rows(), self.sigma.len(), |i, j| {
            self.u[(i, j)] * self.sigma[j]
        });
        us.matmul(&self.vt).expect("svd factor shapes")
    }
}

/// One-sided Jacobi SVD.
///
/// Singular values come back nonincreasing; ties keep the column order of the
/// sweep. Each right singular vector has its first nonzero entry positive.
pub fn svd<T: Scalar>(a: &DenseMatrix<T>) -> Result<SvdResult<T>> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::Dimension("svd of an empty matrix".into()));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("svd input"));
    }
    if a.rows() >= a.cols() {
        Ok(tall(a))
    } else {
        let t = tall(&a.transpose());
        Ok(SvdResult { u: t.vt.transpose(), sigma: t.sigma, vt: t.u.transpose() })
    }
}

/// Singular values only.
pub fn singular_values<T: Scalar>(a: &DenseMatrix<T>) -> Result<Vec<T>> {
    Ok(svd(a)?.sigma)
}

/// Least significant right singular vector, sign-normalized.
///
/// Wide inputs are padded with zero rows so the full right basis exists.
pub fn null_vector<T: Scalar>(a: &DenseMatrix<T>) -> Result<Vec<T>> {
    let n = a.cols();
    if n < 2 {
        return Err(Error::Dimension("null_vector needs at least two columns".into()));
    }
    let s = if a.rows() < n {
        svd(&a.vstack(&DenseMatrix::zeros(n - a.rows(), n))?)?
    } else {
        svd(a)?
    };
    Ok(s.vt.row(s.vt.rows() - 1).to_vec())
}

/// Flips `v` so its first entry above a small threshold is positive. Returns whether it flipped.
pub(crate) fn orient<T: Scalar>(v: &mut [T]) -> bool {
    let thr = T::epsilon() * T::lit(100.0) * norm2(v);
    if let Some(&first) = v.iter().find(|x| x.abs() > thr) {
        if first < T::zero() {
            v.iter_mut().for_each(|x| *x = -*x);
            return true;
        }
    }
    false
}

fn tall<T: Scalar>(a: &DenseMatrix<T>) -> SvdResult<T> {
    let (m, n) = a.shape();
    let mut w: Vec<Vec<T>> = (0..n).map(|j| a.col(j)).collect();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    let eps = T::epsilon();
    let two = T::lit(2.0);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (two * gamma);
                let sgn = if zeta >= T::zero() { T::one() } else { -T::one() };
                let t = sgn / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<T> = w.iter().map(|c| norm2(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).expect("finite norms"));

    let sigma: Vec<T> = order.iter().map(|&j| norms[j]).collect();
    let mut ucols: Vec<Vec<T>> = Vec::with_capacity(n);
    let mut vcols: Vec<Vec<T>> = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let mut vc = v[j].clone();
        let mut uc: Vec<T> = if sigma[k] > T::min_positive_value() {
            w[j].iter().map(|&x| x / sigma[k]).collect()
        } else {
            vec![T::zero(); m]
        };
        if orient(&mut vc) {
            uc.iter_mut().for_each(|x| *x = -*x);
        }
        vcols.push(vc);
        ucols.push(uc);
    }
    complete_orthonormal(&mut ucols, &sigma);

    SvdResult {
        u: DenseMatrix::from_fn(m, n, |i, j| ucols[j][i]),
        sigma,
        vt: DenseMatrix::from_fn(n, n, |i, j| vcols[i][j]),
    }
}

fn rotate<T: Scalar>(cols: &mut [Vec<T>], p: usize, q: usize, c: T, s: T) {
    let (lo, hi) = cols.split_at_mut(q);
    for (xp, xq) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
        let a = *xp;
        let b = *xq;
        *xp = c * a - s * b;
        *xq = s * a + c * b;
    }
}

/// Re-orthogonalizes columns whose singular value is tiny and fills zero
/// columns from the standard basis.
fn complete_orthonormal<T: Scalar>(cols: &mut [Vec<T>], sigma: &[T]) {
    let m = cols.first().map_or(0, Vec::len);
    let cut = sigma.first().copied().unwrap_or(T::zero()) * T::epsilon().sqrt();
    for j in 0..cols.len() {
        if sigma[j] > cut && sigma[j] > T::min_positive_value() {
            continue;
        }
        let candidates = std::iter::once(cols[j].clone()).chain((0..m).map(|e| {
            let mut b = vec![T::zero(); m];
            b[e] = T::one();
            b
        }));
        for mut c in candidates {
            for _ in 0..2 {
                for prev in cols.iter().take(j) {
                    let d = dot(prev, &c);
                    c.iter_mut().zip(prev).for_each(|(x, &p)| *x -= d * p);
                }
            }
            let nrm = norm2(&c);
            if nrm > T::lit(0.5) {
                c.iter_mut().for_each(|x| *x /= nrm);
                cols[j] = c;
                break;
            }
        }
    }
}
