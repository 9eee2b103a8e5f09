use crate::error::{Error, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Shared solver settings.
///
/// Every solver minimises `‖y − A x‖² + λ‖x‖` with `λ = 1/mu`, so a larger
/// `mu` trusts the data more. With step constant `a` the shrinkage applied per
/// iteration is `1/(2·a·mu)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "T: Scalar + Deserialize<'de>", serialize = "T: Serialize"))]
pub struct DenoiseConfig<T> {
    pub mu: T,
    /// Random projections for [`matrix_denoise`](super::matrix_denoise); `None` picks
    /// `min(mn, 4(m+n)(n−1))`.
    pub projections_p: Option<usize>,
    /// Majorisation constant; `None` uses `1.01·λ_max(AᵀA)`.
    pub step_a: Option<T>,
    pub max_outer: usize,
    pub max_inner: usize,
    pub tol: T,
    pub eps_rank: T,
    pub seed: u64,
}

impl<T: Scalar> Default for DenoiseConfig<T> {
    fn default() -> Self {
        Self {
            mu: T::lit(25.0),
            projections_p: None,
            step_a: None,
            max_outer: 100,
            max_inner: 500,
            tol: T::lit(1e-8),
            eps_rank: T::lit(1e-4),
            seed: 0,
        }
    }
}

impl<T: Scalar> DenoiseConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: T| v.is_finite() && v > T::zero();
        if !pos(self.mu) {
            return Err(Error::Invalid("mu must be positive".into()));
        }
        if !pos(self.tol) || !pos(self.eps_rank) {
            return Err(Error::Invalid("tol and eps_rank must be positive".into()));
        }
        if self.projections_p == Some(0) {
            return Err(Error::Invalid("projections_p must be at least 1".into()));
        }
        if matches!(self.step_a, Some(a) if !pos(a)) {
            return Err(Error::Invalid("step_a must be positive".into()));
        }
        if self.max_inner == 0 || self.max_outer == 0 {
            return Err(Error::Invalid("iteration caps must be at least 1".into()));
        }
        Ok(())
    }

    /// L1 (or nuclear) weight `λ = 1/mu`.
    pub fn lambda(&self) -> T {
        T::one() / self.mu
    }

    /// Shrinkage per prox-gradient step with constant `a`.
    pub fn threshold(&self, a: T) -> T {
        T::one() / (T::lit(2.0) * a * self.mu)
    }
}
