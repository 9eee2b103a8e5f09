use super::DenseMatrix;
use crate::rng::{gaussian_vec, seeded};
use crate::scalar::{dot, norm2, Scalar};

const POWER_SEED: u64 = 0x5_eed0_fa7a;
const MAX_ITERS: usize = 20_000;

/// `λ_max(AᵀA)` by power iteration from a fixed random start.
///
/// Returns the final Rayleigh quotient, which never exceeds the true value.
pub fn spectral_norm_sq<T: Scalar>(a: &DenseMatrix<T>) -> T {
    if a.frobenius() == T::zero() {
        return T::zero();
    }
    let mut rng = seeded(POWER_SEED);
    let mut v: Vec<T> = gaussian_vec(&mut rng, a.cols());
    let n0 = norm2(&v);
    v.iter_mut().for_each(|x| *x /= n0);
    let mut lambda = T::zero();
    let tol = T::epsilon() * T::lit(4.0);
    for _ in 0..MAX_ITERS {
        let w = a.tmatvec(&a.matvec(&v));
        let next = dot(&v, &w);
        let nw = norm2(&w);
        if nw == T::zero() {
            break;
        }
        v = w.iter().map(|&x| x / nw).collect();
        let done = (next - lambda).abs() <= tol * next;
        lambda = next;
        if done {
            break;
        }
    }
    let av = a.matvec(&v);
    dot(&av, &av)
}
