use crate::error::{Error, Result};
use crate::linalg::{spectral_norm_sq, DenseMatrix};
use crate::rng::{gaussian, seeded};
use crate::scalar::{dot, norm2, Scalar};

/// Linear measurement map `A` with its exact adjoint.
#[derive(Clone, Debug)]
pub enum MeasurementOperator<T> {
    Dense(DenseMatrix<T>),
    /// Picks entries `indices` out of a vector of length `in_dim`.
    Sampling { in_dim: usize, indices: Vec<usize> },
}

impl<T: Scalar> MeasurementOperator<T> {
    pub fn dense(a: DenseMatrix<T>) -> Self {
        Self::Dense(a)
    }

    pub fn sampling(in_dim: usize, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invalid("duplicate sample index".into()));
        }
        if indices.last().is_some_and(|&i| i >= in_dim) {
            return Err(Error::Invalid("sample index out of range".into()));
        }
        Ok(Self::Sampling { in_dim, indices })
    }

    /// Seeded Gaussian `p × n` matrix with entries of variance `1/p`.
    pub fn gaussian(p: usize, n: usize, seed: u64) -> Self {
        let mut rng = seeded(seed);
        let s = T::one() / T::from_usize_lossy(p).sqrt();
        Self::Dense(DenseMatrix::from_fn(p, n, |_, _| s * gaussian::<T>(&mut rng)))
    }

    /// Seeded Gaussian `p × n` (`p ≤ n`) with rows orthonormalised by Gram–Schmidt
    /// with reorthogonalisation, so `AᵀA` is an orthogonal projector.
    pub fn orthonormal_gaussian(p: usize, n: usize, seed: u64) -> Result<Self> {
        if p > n {
            return Err(Error::Dimension(format!("{p} orthonormal rows in dimension {n}")));
        }
        let Self::Dense(mut a) = Self::gaussian(p, n, seed) else { unreachable!() };
        for i in 0..p {
            // two sweeps keep the rows orthogonal to working precision
            for k in (0..i).chain(0..i) {
                let (head, tail) = a.as_mut_slice().split_at_mut(i * n);
                let prev = &head[k * n..(k + 1) * n];
                let row = &mut tail[..n];
                let c = dot(prev, row);
                row.iter_mut().zip(prev).for_each(|(r, &q)| *r -= c * q);
            }
            let row = a.row_mut(i);
            let nrm = norm2(row);
            if nrm == T::zero() {
                return Err(Error::Invalid("degenerate projection draw".into()));
            }
            row.iter_mut().for_each(|r| *r /= nrm);
        }
        Ok(Self::Dense(a))
    }

    pub fn in_dim(&self) -> usize {
        match self {
            Self::Dense(a) => a.cols(),
            Self::Sampling { in_dim, .. } => *in_dim,
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            Self::Dense(a) => a.rows(),
            Self::Sampling { indices, .. } => indices.len(),
        }
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        match self {
            Self::Dense(a) => a.matvec(x),
            Self::Sampling { indices, .. } => indices.iter().map(|&i| x[i]).collect(),
        }
    }

    pub fn adjoint(&self, y: &[T]) -> Vec<T> {
        match self {
            Self::Dense(a) => a.tmatvec(y),
            Self::Sampling { in_dim, indices } => {
                let mut out = vec![T::zero(); *in_dim];
                for (&i, &v) in indices.iter().zip(y) {
                    out[i] = v;
                }
                out
            }
        }
    }

    /// `λ_max(AᵀA)`.
    pub fn lambda_max(&self) -> T {
        match self {
            Self::Dense(a) => spectral_norm_sq(a),
            Self::Sampling { indices, .. } => {
                if indices.is_empty() {
                    T::zero()
                } else {
                    T::one()
                }
            }
        }
    }
}
