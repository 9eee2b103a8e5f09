use super::detect::{search, DetectConfig, SymmetryResult};
use crate::error::{Error, Result};
use crate::jetspace::JetSample;
use crate::scalar::Scalar;

/// Tensor grid of evaluation points.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    pub t: Vec<T>,
    pub x: Vec<T>,
}

impl<T: Scalar> Grid<T> {
    /// `n × n` uniform grid over the bounding box of the samples.
    pub fn covering(samples: &[JetSample<T>], n: usize) -> Self {
        let span = |f: fn(&JetSample<T>) -> T| {
            let lo = samples.iter().map(f).fold(T::infinity(), T::min);
            let hi = samples.iter().map(f).fold(T::neg_infinity(), T::max);
            linspace(lo, hi, n)
        };
        Self { t: span(|s| s.t), x: span(|s| s.x) }
    }
}

pub fn linspace<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1)).collect(),
    }
}

/// `f̂ = ξ_x/ξ_t` on a grid.
#[derive(Clone, Debug)]
pub struct Readout<T> {
    /// `values[i][j]` at `(grid.t[i], grid.x[j])`; `None` where `ξ_t` vanishes or a pole is hit.
    pub values: Vec<Vec<Option<T>>>,
    /// RMS of `ẋ − f̂` over samples where the ratio is defined.
    pub residual_rms: T,
    pub used_samples: usize,
}

/// Reads the evolution field off an aligned generator.
///
/// Refused when the alignment is below `threshold`: the ratio of a generator
/// that is not evolution-aligned is not the right-hand side.
pub fn model_readout<T: Scalar>(
    result: &SymmetryResult<T>,
    samples: &[JetSample<T>],
    grid: &Grid<T>,
    threshold: T,
) -> Result<Readout<T>> {
    if !result.found {
        return Err(Error::Invalid("no generator to read out".into()));
    }
    if result.alignment.degenerate || result.alignment.score < threshold {
        return Err(Error::ReadoutRefused {
            alignment: result.alignment.score.to_f64_lossy(),
            threshold: threshold.to_f64_lossy(),
        });
    }
    let ratio = |t: T, x: T| -> Option<T> {
        let a = result.xi_t(t, x).ok()?;
        let b = result.xi_x(t, x).ok()?;
        let v = b / a;
        (a != T::zero() && v.is_finite()).then_some(v)
    };
    let values = grid.t.iter().map(|&t| grid.x.iter().map(|&x| ratio(t, x)).collect()).collect();
    let res: Vec<T> = samples.iter().filter_map(|s| ratio(s.t, s.x).map(|f| s.xdot - f)).collect();
    let used = res.len();
    let rms = if used == 0 {
        T::nan()
    } else {
        (res.iter().map(|&r| r * r).sum::<T>() / T::from_usize_lossy(used)).sqrt()
    };
    Ok(Readout { values, residual_rms: rms, used_samples: used })
}

/// Searches for an evolution-aligned generator `ξ_t·(1, f)`.
///
/// Adds the rows `ξ_x − ẋ·ξ_t = 0` to the determining system and runs the
/// same degree loop, so the null vector found is one whose ratio is `f`.
pub fn evolution_generator<T: Scalar>(samples: &[JetSample<T>], cfg: &DetectConfig<T>) -> Result<SymmetryResult<T>> {
    search(samples, cfg, true)
}
