use crate::error::Result;
use crate::linalg::{svd, DenseMatrix};
use crate::scalar::Scalar;

fn shrink<T: Scalar>(q: T, tau: T) -> T {
    let m = (q.abs() - tau).max(T::zero());
    if q < T::zero() {
        -m
    } else {
        m
    }
}

/// Elementwise `sgn(q)·max(0, |q| − tau)`.
pub fn soft_threshold<T: Scalar>(q: &[T], tau: T) -> Vec<T> {
    q.iter().map(|&v| shrink(v, tau)).collect()
}

/// MAP estimate of a Laplacian-prior signal under Gaussian noise; equals soft
/// thresholding at `√2·σ_g²/σ_l`.
pub fn map_shrinkage<T: Scalar>(x: T, sigma_g: T, sigma_l: T) -> T {
    shrink(x, T::lit(2.0).sqrt() * sigma_g * sigma_g / sigma_l)
}

/// Singular value thresholding: `U·diag(soft(σ, tau))·Vᵀ`.
pub fn svt<T: Scalar>(m: &DenseMatrix<T>, tau: T) -> Result<DenseMatrix<T>> {
    let s = svd(m)?;
    let kept = soft_threshold(&s.sigma, tau);
    let (rows, cols) = m.shape();
    let mut out = DenseMatrix::zeros(rows, cols);
    for (k, &sk) in kept.iter().enumerate() {
        if sk == T::zero() {
            continue;
        }
        for i in 0..rows {
            let ui = s.u[(i, k)] * sk;
            if ui == T::zero() {
                continue;
            }
            for (o, &v) in out.row_mut(i).iter_mut().zip(s.vt.row(k)) {
                *o += ui * v;
            }
        }
    }
    Ok(out)
}
