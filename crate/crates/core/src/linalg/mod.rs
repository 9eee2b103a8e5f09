//! Dense linear algebra: Jacobi SVD, null vectors, power iteration, least squares.

mod lstsq;
mod matrix;
mod power;
mod svd;

pub use lstsq::{lstsq, pinv, LstsqSolution};
pub use matrix::DenseMatrix;
pub use power::spectral_norm_sq;
pub use svd::{null_vector, singular_values, svd, SvdResult};
pub(crate) use svd::orient;

