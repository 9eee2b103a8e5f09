//! Trajectories to jet-space samples: derivatives along curves, then local
//! estimates of `∇f` from neighbourhoods that span several curves.

mod io;

pub use io::{read_trajectories, write_trajectories};

use crate::error::{Error, Result};
use crate::linalg::{lstsq, DenseMatrix};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// One sampled solution curve.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub id: String,
    pub times: Vec<T>,
    pub states: Vec<T>,
}

impl<T: Scalar> Trajectory<T> {
    /// Checks length ≥ 3, strictly increasing times and finite values.
    pub fn new(id: impl Into<String>, times: Vec<T>, states: Vec<T>) -> Result<Self> {
        let id = id.into();
        if times.len() != states.len() {
            return Err(Error::Dimension(format!("trajectory {id}: times and states differ in length")));
        }
        if times.len() < 3 {
            return Err(Error::Invalid(format!("trajectory {id}: needs at least 3 points")));
        }
        if times.iter().chain(&states).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("trajectory"));
        }
        for w in times.windows(2) {
            if w[1] == w[0] {
                return Err(Error::DuplicateTime { id, t: w[0].to_f64_lossy() });
            }
            if w[1] < w[0] {
                return Err(Error::Invalid(format!("trajectory {id}: times not increasing")));
            }
        }
        Ok(Self { id, times, states })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Point on a curve with its time derivative, tagged with the curve it came from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivSample<T> {
    pub traj: usize,
    pub t: T,
    pub x: T,
    pub xdot: T,
}

/// Jet-space point with the local gradient of `f`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JetSample<T> {
    pub t: T,
    pub x: T,
    pub xdot: T,
    pub f_t: T,
    pub f_x: T,
    pub weight: T,
}

/// Three-point derivative on a nonuniform grid, second-order one-sided at the ends.
///
/// Returns `(t, x, xdot)` per node.
pub fn estimate_derivatives<T: Scalar>(traj: &Trajectory<T>) -> Result<Vec<(T, T, T)>> {
    let t = &traj.times;
    let x = &traj.states;
    let n = t.len();
    if n < 3 {
        return Err(Error::Invalid("derivative needs at least 3 points".into()));
    }
    if let Some(w) = t.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::DuplicateTime { id: traj.id.clone(), t: w[0].to_f64_lossy() });
    }
    let two = T::lit(2.0);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let d = if i == 0 {
            let (h1, h2) = (t[1] - t[0], t[2] - t[1]);
            -(two * h1 + h2) / (h1 * (h1 + h2)) * x[0] + (h1 + h2) / (h1 * h2) * x[1]
                - h1 / (h2 * (h1 + h2)) * x[2]
        } else if i == n - 1 {
            let (h1, h2) = (t[n - 2] - t[n - 3], t[n - 1] - t[n - 2]);
            h2 / (h1 * (h1 + h2)) * x[n - 3] - (h1 + h2) / (h1 * h2) * x[n - 2]
                + (two * h2 + h1) / (h2 * (h1 + h2)) * x[n - 1]
        } else {
            let (h1, h2) = (t[i] - t[i - 1], t[i + 1] - t[i]);
            -h2 / (h1 * (h1 + h2)) * x[i - 1] + (h2 - h1) / (h1 * h2) * x[i]
                + h1 / (h2 * (h1 + h2)) * x[i + 1]
        };
        out.push((t[i], x[i], d));
    }
    Ok(out)
}

/// Local polynomial (Savitzky–Golay style) smoothing on a nonuniform grid.
///
/// Each node gets a least-squares polynomial of `degree` over `window`
/// consecutive nodes, shifted inward at the ends. Returns `(t, x̂, x̂')`.
pub fn smooth_derivatives<T: Scalar>(
    traj: &Trajectory<T>,
    window: usize,
    degree: usize,
) -> Result<Vec<(T, T, T)>> {
    let n = traj.len();
    if degree < 1 || window < degree + 2 || window > n {
        return Err(Error::Invalid(format!(
            "local polynomial needs degree ≥ 1 and degree + 2 ≤ window ≤ {n}, got window {window}, degree {degree}"
        )));
    }
    let half = window / 2;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(half).min(n - window);
        let t0 = traj.times[i];
        let span = (traj.times[lo + window - 1] - traj.times[lo]).max(T::min_positive_value());
        let a = DenseMatrix::from_fn(window, degree + 1, |r, c| {
            ((traj.times[lo + r] - t0) / span).powi(c as i32)
        });
        let sol = lstsq(&a, &traj.states[lo..lo + window], T::lit(1e-12))?;
        if sol.rank < degree + 1 {
            return Err(Error::Invalid(format!("trajectory {}: degenerate smoothing window", traj.id)));
        }
        out.push((t0, sol.x[0], sol.x[1] / span));
    }
    Ok(out)
}

/// How `ẋ` is obtained along each curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DerivativeMethod {
    /// Three-point finite differences; states kept as given.
    Central,
    /// Local polynomial fit; states replaced by the fitted values.
    LocalPoly { window: usize, degree: usize },
}

/// Applies `method` to every trajectory and tags samples with their curve index.
pub fn derivative_samples<T: Scalar>(
    trajs: &[Trajectory<T>],
    method: DerivativeMethod,
) -> Result<Vec<DerivSample<T>>> {
    let mut out = Vec::new();
    for (k, tr) in trajs.iter().enumerate() {
        let pts = match method {
            DerivativeMethod::Central => estimate_derivatives(tr)?,
            DerivativeMethod::LocalPoly { window, degree } => smooth_derivatives(tr, window, degree)?,
        };
        out.extend(pts.into_iter().map(|(t, x, xdot)| DerivSample { traj: k, t, x, xdot }));
    }
    Ok(out)
}

/// Neighbourhood fit settings for [`estimate_normals`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalConfig {
    /// Neighbours per fit, including the sample itself.
    pub k: usize,
    /// Total degree of the local polynomial in `(t − t₀, x − x₀)`; 1 to 3.
    pub fit_degree: usize,
    /// Most neighbours drawn from any one curve before others are tried.
    pub per_curve_cap: Option<usize>,
    /// Replace `ẋ` with the fitted value at the sample.
    pub fitted_xdot: bool,
}

impl Default for NormalConfig {
    fn default() -> Self {
        Self { k: 60, fit_degree: 3, per_curve_cap: Some(15), fitted_xdot: true }
    }
}

pub const WEIGHT_FLOOR: f64 = 1e-6;
pub const WEIGHT_CAP: f64 = 1e6;

#[derive(Clone, Debug)]
pub struct NormalsOutcome<T> {
    pub samples: Vec<JetSample<T>>,
    /// Input position of each output sample.
    pub source: Vec<usize>,
    /// Samples whose local fit was rank deficient.
    pub dropped: usize,
}

/// Estimates `(f_t, f_x)` at every sample by a local least-squares fit of `ẋ`.
///
/// Distances are Euclidean in z-scored `(t, x)`. Weight is the inverse residual
/// variance of the fit, clamped to `[1e-6, 1e6]`.
pub fn estimate_normals<T: Scalar>(
    samples: &[DerivSample<T>],
    cfg: &NormalConfig,
) -> Result<NormalsOutcome<T>> {
    let n = samples.len();
    if cfg.k < 4 || n < cfg.k {
        return Err(Error::Invalid(format!("need samples ≥ k ≥ 4, got {n} samples and k = {}", cfg.k)));
    }
    if !(1..=3).contains(&cfg.fit_degree) {
        return Err(Error::Invalid("fit_degree must be 1, 2 or 3".into()));
    }
    if samples.iter().any(|s| !(s.t.is_finite() && s.x.is_finite() && s.xdot.is_finite())) {
        return Err(Error::NonFinite("derivative samples"));
    }
    let (mt, st) = mean_std(samples.iter().map(|s| s.t));
    let (mx, sx) = mean_std(samples.iter().map(|s| s.x));
    let zt: Vec<T> = samples.iter().map(|s| (s.t - mt) / st).collect();
    let zx: Vec<T> = samples.iter().map(|s| (s.x - mx) / sx).collect();
    let exps = fit_exponents(cfg.fit_degree);
    let ncoef = exps.len();

    let mut out = NormalsOutcome { samples: Vec::with_capacity(n), source: Vec::with_capacity(n), dropped: 0 };
    let mut dist: Vec<(T, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        dist.clear();
        dist.extend((0..n).map(|j| {
            let (dt, dx) = (zt[j] - zt[i], zx[j] - zx[i]);
            (dt * dt + dx * dx, j)
        }));
        dist.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances").then(a.1.cmp(&b.1)));
        let nb = pick_neighbours(&dist, samples, cfg);
        // unit-radius local coordinates keep the monomial columns comparable
        let radius = nb.iter().map(|&j| dist_of(&zt, &zx, i, j)).fold(T::zero(), T::max);
        let radius = if radius > T::zero() { radius } else { T::one() };

        let a = DenseMatrix::from_fn(nb.len(), ncoef, |r, c| {
            let j = nb[r];
            let (p, q) = exps[c];
            ((zt[j] - zt[i]) / radius).powi(p) * ((zx[j] - zx[i]) / radius).powi(q)
        });
        let y: Vec<T> = nb.iter().map(|&j| samples[j].xdot).collect();
        let sol = lstsq(&a, &y, T::lit(1e-10))?;
        if sol.rank < ncoef {
            out.dropped += 1;
            continue;
        }
        let fitted = a.matvec(&sol.x);
        let ss: T = fitted.iter().zip(&y).map(|(&f, &v)| (v - f) * (v - f)).sum();
        let var = ss / T::from_usize_lossy((nb.len() - ncoef).max(1));
        let weight = if var > T::zero() { T::one() / var } else { T::lit(WEIGHT_CAP) };
        let s = samples[i];
        out.samples.push(JetSample {
            t: s.t,
            x: s.x,
            xdot: if cfg.fitted_xdot { sol.x[0] } else { s.xdot },
            f_t: sol.x[1] / (st * radius),
            f_x: sol.x[2] / (sx * radius),
            weight: weight.max(T::lit(WEIGHT_FLOOR)).min(T::lit(WEIGHT_CAP)),
        });
        out.source.push(i);
    }
    Ok(out)
}

fn dist_of<T: Scalar>(zt: &[T], zx: &[T], i: usize, j: usize) -> T {
    let (dt, dx) = (zt[j] - zt[i], zx[j] - zx[i]);
    (dt * dt + dx * dx).sqrt()
}

fn pick_neighbours<T: Scalar>(dist: &[(T, usize)], samples: &[DerivSample<T>], cfg: &NormalConfig) -> Vec<usize> {
    let Some(cap) = cfg.per_curve_cap else {
        return dist.iter().take(cfg.k).map(|d| d.1).collect();
    };
    let mut counts = std::collections::HashMap::new();
    let mut taken = vec![false; dist.len()];
    let mut nb = Vec::with_capacity(cfg.k);
    for (pos, &(_, j)) in dist.iter().enumerate() {
        let c = counts.entry(samples[j].traj).or_insert(0usize);
        if *c < cap {
            *c += 1;
            taken[pos] = true;
            nb.push(j);
            if nb.len() == cfg.k {
                return nb;
            }
        }
    }
    // not enough curves to honour the cap: top up with the nearest leftovers
    for (pos, &(_, j)) in dist.iter().enumerate() {
        if nb.len() == cfg.k {
            break;
        }
        if !taken[pos] {
            nb.push(j);
        }
    }
    nb
}

/// Exponents `(p, q)` of the local fit, constant and linear terms first.
fn fit_exponents(degree: usize) -> Vec<(i32, i32)> {
    let mut e = vec![(0, 0), (1, 0), (0, 1)];
    for d in 2..=degree as i32 {
        for p in (0..=d).rev() {
            e.push((p, d - p));
        }
    }
    e
}

fn mean_std<T: Scalar>(it: impl Iterator<Item = T> + Clone) -> (T, T) {
    let n = T::from_usize_lossy(it.clone().count());
    let mean = it.clone().sum::<T>() / n;
    let var = it.map(|v| (v - mean) * (v - mean)).sum::<T>() / n;
    let sd = var.sqrt();
    (mean, if sd > T::zero() { sd } else { T::one() })
}
