//! Graded Laurent monomials `t^a x^b` and their exact partial derivatives.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;

/// Exponent pair `(a, b)` of `t^a x^b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    pub a: i32,
    pub b: i32,
}

impl MultiIndex {
    pub const fn new(a: i32, b: i32) -> Self {
        Self { a, b }
    }

    pub fn total(&self) -> i32 {
        self.a.abs() + self.b.abs()
    }

    fn graded_cmp(&self, other: &Self) -> Ordering {
        (self.total(), self.a, self.b).cmp(&(other.total(), other.a, other.b))
    }
}

impl Serialize for MultiIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.a, self.b].serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [a, b] = <[i32; 2]>::deserialize(d)?;
        Ok(Self { a, b })
    }
}

/// Ordered monomial set; the column layout of one expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisSpec {
    indices: Vec<MultiIndex>,
    allow_negative: bool,
}

impl BasisSpec {
    /// Validates graded order, uniqueness and sign restrictions.
    pub fn from_indices(indices: Vec<MultiIndex>, allow_negative: bool) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Invalid("empty basis".into()));
        }
        if !allow_negative && indices.iter().any(|i| i.a < 0 || i.b < 0) {
            return Err(Error::Invalid("negative power in a nonnegative basis".into()));
        }
        if indices.windows(2).any(|w| w[0].graded_cmp(&w[1]) != Ordering::Less) {
            return Err(Error::Invalid("basis indices not in strict graded order".into()));
        }
        Ok(Self { indices, allow_negative })
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn allow_negative(&self) -> bool {
        self.allow_negative
    }

    pub fn max_degree(&self) -> i32 {
        self.indices.iter().map(MultiIndex::total).max().unwrap_or(0)
    }

    pub fn position(&self, idx: MultiIndex) -> Option<usize> {
        self.indices.iter().position(|&i| i == idx)
    }

    /// Evaluates `Σ c_k m_k(t, x)`.
    pub fn eval_series<T: Scalar>(&self, coeffs: &[T], t: T, x: T) -> Result<T> {
        let mut acc = T::zero();
        for (&idx, &c) in self.indices.iter().zip(coeffs) {
            if c != T::zero() {
                acc += c * eval_monomial(idx, t, x)?;
            }
        }
        Ok(acc)
    }
}

impl Serialize for BasisSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.indices.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BasisSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let indices = Vec::<MultiIndex>::deserialize(d)?;
        let neg = indices.iter().any(|i| i.a < 0 || i.b < 0);
        Self::from_indices(indices, neg).map_err(serde::de::Error::custom)
    }
}

/// All indices with `|a| + |b| ≤ max_degree`, in graded order.
pub fn enumerate_basis(max_degree: u32, allow_negative: bool) -> BasisSpec {
    let d = max_degree as i32;
    let lo = if allow_negative { -d } else { 0 };
    let mut indices = Vec::new();
    for a in lo..=d {
        for b in lo..=d {
            let idx = MultiIndex::new(a, b);
            if idx.total() <= d {
                indices.push(idx);
            }
        }
    }
    indices.sort_by(MultiIndex::graded_cmp);
    BasisSpec { indices, allow_negative }
}

fn pole_check<T: Scalar>(idx: MultiIndex, t: T, x: T) -> Result<()> {
    if (idx.a < 0 && t == T::zero()) || (idx.b < 0 && x == T::zero()) {
        return Err(Error::Pole { a: idx.a, b: idx.b, t: t.to_f64_lossy(), x: x.to_f64_lossy() });
    }
    Ok(())
}

/// `t^a x^b`; errors at a pole.
pub fn eval_monomial<T: Scalar>(idx: MultiIndex, t: T, x: T) -> Result<T> {
    pole_check(idx, t, x)?;
    Ok(t.powi(idx.a) * x.powi(idx.b))
}

/// `(∂/∂t, ∂/∂x)` of `t^a x^b`.
pub fn eval_partials<T: Scalar>(idx: MultiIndex, t: T, x: T) -> Result<(T, T)> {
    pole_check(idx, t, x)?;
    let dt = if idx.a == 0 {
        T::zero()
    } else {
        pole_check(MultiIndex::new(idx.a - 1, 0), t, x)?;
        T::lit(idx.a as f64) * t.powi(idx.a - 1) * x.powi(idx.b)
    };
    let dx = if idx.b == 0 {
        T::zero()
    } else {
        pole_check(MultiIndex::new(0, idx.b - 1), t, x)?;
        T::lit(idx.b as f64) * t.powi(idx.a) * x.powi(idx.b - 1)
    };
    Ok((dt, dx))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(b: &BasisSpec) -> Vec<(i32, i32)> {
        b.indices().iter().map(|i| (i.a, i.b)).collect()
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(pairs(&enumerate_basis(1, false)), vec![(0, 0), (0, 1), (1, 0)]);
        assert_eq!(pairs(&enumerate_basis(0, false)), vec![(0, 0)]);
        let neg = enumerate_basis(1, true);
        assert_eq!(neg.len(), 5);
        for p in [(0, 0), (0, 1), (0, -1), (1, 0), (-1, 0)] {
            assert!(pairs(&neg).contains(&p));
        }
        assert_eq!(enumerate_basis(2, false).len(), 6);
    }

    #[test]
    fn monomial_examples() {
        assert_eq!(eval_monomial(MultiIndex::new(1, 1), 2.0, 3.0).unwrap(), 6.0);
        assert_eq!(eval_monomial(MultiIndex::new(0, 0), -7.5, 0.0).unwrap(), 1.0);
        assert_eq!(eval_monomial(MultiIndex::new(-1, 2), 2.0, 3.0).unwrap(), 4.5);
        assert!(matches!(eval_monomial(MultiIndex::new(-1, 0), 0.0, 1.0), Err(Error::Pole { .. })));
        assert!(eval_monomial(MultiIndex::new(0, -2), 1.0, 0.0).is_err());
    }

    #[test]
    fn partial_examples() {
        assert_eq!(eval_partials(MultiIndex::new(2, 0), 3.0, 1.0).unwrap(), (6.0, 0.0));
        assert_eq!(eval_partials(MultiIndex::new(0, 0), 0.0, 0.0).unwrap(), (0.0, 0.0));
        assert_eq!(eval_partials(MultiIndex::new(1, 1), 2.0, 3.0).unwrap(), (3.0, 2.0));
        assert_eq!(eval_partials(MultiIndex::new(1, 0), 0.0, 5.0).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn from_indices_rejects_disorder() {
        let bad = vec![MultiIndex::new(1, 0), MultiIndex::new(0, 0)];
        assert!(BasisSpec::from_indices(bad, false).is_err());
        let dup = vec![MultiIndex::new(0, 0), MultiIndex::new(0, 0)];
        assert!(BasisSpec::from_indices(dup, false).is_err());
        assert!(BasisSpec::from_indices(vec![], false).is_err());
    }
}
