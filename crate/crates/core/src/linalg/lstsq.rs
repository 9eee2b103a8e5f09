use super::{svd, DenseMatrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Minimum-norm least-squares solution of `A x ≈ b`.
#[derive(Clone, Debug)]
pub struct LstsqSolution<T> {
    pub x: Vec<T>,
    /// Numerical rank under the relative cutoff.
    pub rank: usize,
    pub sigma: Vec<T>,
}

/// Solves through the pseudo-inverse, discarding singular values below `rcond * σ₁`.
pub fn lstsq<T: Scalar>(a: &DenseMatrix<T>, b: &[T], rcond: T) -> Result<LstsqSolution<T>> {
    if b.len() != a.rows() {
        return Err(Error::Dimension(format!("rhs length {} vs {} rows", b.len(), a.rows())));
    }
    let s = svd(a)?;
    let cut = s.sigma.first().copied().unwrap_or(T::zero()) * rcond;
    let utb = s.u.tmatvec(b);
    let mut x = vec![T::zero(); a.cols()];
    let mut rank = 0;
    for (k, &sk) in s.sigma.iter().enumerate() {
        if sk <= cut || sk == T::zero() {
            continue;
        }
        rank += 1;
        let c = utb[k] / sk;
        for (xi, &v) in x.iter_mut().zip(s.vt.row(k)) {
            *xi += c * v;
        }
    }
    Ok(LstsqSolution { x, rank, sigma: s.sigma })
}

/// Moore–Penrose pseudo-inverse.
pub fn pinv<T: Scalar>(a: &DenseMatrix<T>, rcond: T) -> Result<DenseMatrix<T>> {
    let s = svd(a)?;
    let cut = s.sigma.first().copied().unwrap_or(T::zero()) * rcond;
    let k = s.sigma.len();
    let v_sinv = DenseMatrix::from_fn(a.cols(), k, |i, j| {
        let sj = s.sigma[j];
        if sj > cut && sj > T::zero() {
            s.vt[(j, i)] / sj
        } else {
            T::zero()
        }
    });
    v_sinv.matmul(&s.u.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_overdetermined_fit() {
        let a = DenseMatrix::<f64>::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let sol = lstsq(&a, &[1.0, 3.0, 5.0], 1e-12).unwrap();
        assert_eq!(sol.rank, 2);
        assert!((sol.x[0] - 1.0).abs() < 1e-12 && (sol.x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn pinv_of_rank_one() {
        let a = DenseMatrix::<f64>::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let p = pinv(&a, 1e-12).unwrap();
        for v in p.as_slice() {
            assert!((v - 0.25).abs() < 1e-14);
        }
    }
}
