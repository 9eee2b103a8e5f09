use crate::basis::{eval_monomial, eval_partials, BasisSpec};
use crate::error::{Error, Result};
use crate::jetspace::JetSample;
use crate::linalg::DenseMatrix;
use crate::rng::seeded;
use crate::scalar::Scalar;
use rand::seq::index::sample;

/// Determining equations stacked over samples, columns equilibrated.
#[derive(Clone, Debug)]
pub struct DeterminingSystem<T> {
    /// Column-scaled matrix; column `j` of the raw system is `b[:, j] · column_scales[j]`.
    pub b: DenseMatrix<T>,
    pub t_basis: BasisSpec,
    pub x_basis: BasisSpec,
    /// Input sample behind each row.
    pub sample_index: Vec<usize>,
    pub column_scales: Vec<T>,
    /// Rows lost to poles.
    pub skipped_rows: usize,
    /// Usable rows before any subsampling.
    pub usable_rows: usize,
}

impl<T: Scalar> DeterminingSystem<T> {
    pub fn cols(&self) -> usize {
        self.b.cols()
    }

    /// Maps a coefficient vector of the scaled system back to basis coefficients.
    pub fn unscale(&self, eta: &[T]) -> Vec<T> {
        eta.iter().zip(&self.column_scales).map(|(&e, &s)| e / s).collect()
    }
}

/// Minimum usable rows per column.
pub const ROWS_PER_COLUMN_MIN: usize = 5;

/// Relative floor on column RMS so an identically zero column stays finite.
const SCALE_FLOOR: f64 = 1e-3;

/// One row of `B`: the prolonged generator dotted with `∇F = (−f_t, −f_x, 1)`.
///
/// Columns for the t-expansion hold `F_t·m − ẋ·m_t − ẋ²·m_x`; columns for the
/// x-expansion hold `F_x·m + m_t + ẋ·m_x`. The row is scaled by `√weight`.
/// A pole in any monomial is returned as an error and the row is skipped.
pub fn row_for_sample<T: Scalar>(s: &JetSample<T>, t_basis: &BasisSpec, x_basis: &BasisSpec) -> Result<Vec<T>> {
    let (ft, fx, xd) = (-s.f_t, -s.f_x, s.xdot);
    let w = s.weight.sqrt();
    let mut row = Vec::with_capacity(t_basis.len() + x_basis.len());
    for &idx in t_basis.indices() {
        let m = eval_monomial(idx, s.t, s.x)?;
        let (mt, mx) = eval_partials(idx, s.t, s.x)?;
        row.push(w * (ft * m - xd * mt - xd * xd * mx));
    }
    for &idx in x_basis.indices() {
        let m = eval_monomial(idx, s.t, s.x)?;
        let (mt, mx) = eval_partials(idx, s.t, s.x)?;
        row.push(w * (fx * m + mt + xd * mx));
    }
    Ok(row)
}

/// Evolution rows `ξ_x − ẋ·ξ_t`, one per sample, in the same column layout.
pub(crate) fn evolution_row<T: Scalar>(s: &JetSample<T>, t_basis: &BasisSpec, x_basis: &BasisSpec) -> Result<Vec<T>> {
    let w = s.weight.sqrt();
    let mut row = Vec::with_capacity(t_basis.len() + x_basis.len());
    for &idx in t_basis.indices() {
        row.push(-w * s.xdot * eval_monomial(idx, s.t, s.x)?);
    }
    for &idx in x_basis.indices() {
        row.push(w * eval_monomial(idx, s.t, s.x)?);
    }
    Ok(row)
}

/// Builds `B`, subsampling to `max_rows` (seeded) and scaling columns to unit RMS.
pub fn assemble<T: Scalar>(
    samples: &[JetSample<T>],
    t_basis: &BasisSpec,
    x_basis: &BasisSpec,
    max_rows: Option<usize>,
    seed: u64,
) -> Result<DeterminingSystem<T>> {
    assemble_with(samples, t_basis, x_basis, max_rows, seed, false)
}

pub(crate) fn assemble_with<T: Scalar>(
    samples: &[JetSample<T>],
    t_basis: &BasisSpec,
    x_basis: &BasisSpec,
    max_rows: Option<usize>,
    seed: u64,
    with_evolution: bool,
) -> Result<DeterminingSystem<T>> {
    let cols = t_basis.len() + x_basis.len();
    let mut rows: Vec<Vec<T>> = Vec::new();
    let mut index = Vec::new();
    let mut skipped = 0;
    for (i, s) in samples.iter().enumerate() {
        match row_for_sample(s, t_basis, x_basis) {
            Ok(r) if r.iter().all(|v| v.is_finite()) => {
                rows.push(r);
                index.push(i);
            }
            Ok(_) | Err(Error::Pole { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    let required = ROWS_PER_COLUMN_MIN * cols;
    let usable = rows.len();
    if usable < required {
        return Err(Error::TooFewRows { required, available: usable });
    }
    if let Some(cap) = max_rows {
        if usable > cap.max(required) {
            let mut keep = sample(&mut seeded(seed), usable, cap.max(required)).into_vec();
            keep.sort_unstable();
            rows = keep.iter().map(|&k| std::mem::take(&mut rows[k])).collect();
            index = keep.iter().map(|&k| index[k]).collect();
        }
    }
    if with_evolution {
        let extra: Vec<Vec<T>> =
            index.iter().map(|&i| evolution_row(&samples[i], t_basis, x_basis)).collect::<Result<_>>()?;
        rows.extend(extra);
        let dup = index.clone();
        index.extend(dup);
    }
    let mut b = DenseMatrix::from_rows(&rows)?;
    let scales = equilibrate(&mut b);
    Ok(DeterminingSystem {
        b,
        t_basis: t_basis.clone(),
        x_basis: x_basis.clone(),
        sample_index: index,
        column_scales: scales,
        skipped_rows: skipped,
        usable_rows: usable,
    })
}

/// Divides each column by its RMS, floored at a fraction of the largest.
fn equilibrate<T: Scalar>(b: &mut DenseMatrix<T>) -> Vec<T> {
    let (m, n) = b.shape();
    let rms: Vec<T> = (0..n)
        .map(|j| ((0..m).map(|i| b[(i, j)] * b[(i, j)]).sum::<T>() / T::from_usize_lossy(m)).sqrt())
        .collect();
    let top = rms.iter().copied().fold(T::zero(), T::max);
    let floor = if top > T::zero() { top * T::lit(SCALE_FLOOR) } else { T::one() };
    let scales: Vec<T> = rms.iter().map(|&r| r.max(floor)).collect();
    for i in 0..m {
        for (v, &s) in b.row_mut(i).iter_mut().zip(&scales) {
            *v /= s;
        }
    }
    scales
}
