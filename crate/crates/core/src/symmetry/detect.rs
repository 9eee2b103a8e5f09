use super::system::{assemble_with, DeterminingSystem};
use crate::basis::{enumerate_basis, BasisSpec};
use crate::error::{Error, Result};
use crate::jetspace::JetSample;
use crate::linalg::{null_vector, orient, singular_values, DenseMatrix};
use crate::rng::{derive_seed, seeded};
use crate::scalar::{norm2, Scalar};
use crate::sparseopt::{matrix_denoise, DenoiseConfig};
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

/// Outcome of the rank test on one determining system.
#[derive(Clone, Debug)]
pub struct RankTest<T> {
    /// Exactly one singular value of the denoised matrix below `eps_rank·σ₁`.
    pub deficient_by_one: bool,
    /// Number of denoised singular values below `eps_rank·σ₁`.
    pub null_count: usize,
    /// `σ_{n−1}/σ_n` of the denoised matrix, `σ_n` floored at machine precision times `σ₁`.
    pub gap: T,
    pub denoised_sigma: Vec<T>,
    /// Spectrum of the matrix handed to the denoiser.
    pub raw_sigma: Vec<T>,
    pub rows_used: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Denoises `B` (or a seeded row subsample of `rows_per_column · n` rows) and
/// counts the singular values that fall below `eps_rank·σ₁`.
///
/// With `trials > 1` the test is repeated with independent projection and
/// subsample seeds and the median count is reported, along with the spectrum
/// of the first trial that produced it. A denoiser that hits its iteration cap
/// counts as zero.
pub fn rank_deficiency_test<T: Scalar>(
    sys: &DeterminingSystem<T>,
    cfg: &DenoiseConfig<T>,
    rows_per_column: Option<usize>,
    trials: usize,
) -> Result<RankTest<T>> {
    let mut runs = Vec::with_capacity(trials.max(1));
    for k in 0..trials.max(1) {
        let mut c = *cfg;
        if k > 0 {
            c.seed = derive_seed(cfg.seed, 1000 + k as u64);
        }
        runs.push(single_trial(sys, &c, rows_per_column)?);
    }
    let mut counts: Vec<usize> = runs.iter().map(|r| r.null_count).collect();
    counts.sort_unstable();
    let median = counts[(counts.len() - 1) / 2];
    let pick = runs.iter().position(|r| r.null_count == median).unwrap_or(0);
    Ok(runs.swap_remove(pick))
}

fn single_trial<T: Scalar>(
    sys: &DeterminingSystem<T>,
    cfg: &DenoiseConfig<T>,
    rows_per_column: Option<usize>,
) -> Result<RankTest<T>> {
    let (m, n) = sys.b.shape();
    match rows_per_column {
        Some(k) if k * n < m => {
            let mut keep = sample(&mut seeded(derive_seed(cfg.seed, n as u64)), m, k * n).into_vec();
            keep.sort_unstable();
            rank_test_matrix(&sys.b.select_rows(&keep), cfg)
        }
        _ => rank_test_matrix(&sys.b, cfg),
    }
}

/// The rank test on a bare matrix: one denoising run, no subsampling.
pub fn rank_test_matrix<T: Scalar>(b: &DenseMatrix<T>, cfg: &DenoiseConfig<T>) -> Result<RankTest<T>> {
    let n = b.cols();
    let raw_sigma = singular_values(b)?;
    let out = matrix_denoise(b, cfg)?;
    let sigma = singular_values(&out.matrix)?;
    let s1 = sigma[0];
    let cut = cfg.eps_rank * s1;
    let null_count = if s1 > T::zero() { sigma.iter().filter(|&&s| s <= cut).count() } else { 0 };
    let k = sigma.len();
    let gap = if k >= 2 && s1 > T::zero() {
        sigma[k - 2] / sigma[k - 1].max(T::epsilon() * s1)
    } else {
        T::one()
    };
    Ok(RankTest {
        deficient_by_one: out.converged && s1 > T::zero() && null_count == 1 && k == n,
        null_count: if out.converged { null_count } else { 0 },
        gap: gap.max(T::one()),
        denoised_sigma: sigma,
        raw_sigma,
        rows_used: b.rows(),
        iterations: out.iterations,
        converged: out.converged,
    })
}

/// Settings for the basis-growth loop.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "T: Scalar + Deserialize<'de>", serialize = "T: Serialize"))]
pub struct DetectConfig<T> {
    pub min_degree: u32,
    pub max_degree: u32,
    pub allow_negative: bool,
    /// Cap on rows of the assembled system (seeded subsample above it).
    pub max_rows: Option<usize>,
    /// Rows per column handed to the rank test.
    pub rows_per_column: Option<usize>,
    /// Independent repetitions of the rank test; the median count decides.
    pub rank_trials: usize,
    pub alignment_threshold: T,
    pub denoise: DenoiseConfig<T>,
}

impl<T: Scalar> Default for DetectConfig<T> {
    fn default() -> Self {
        Self {
            min_degree: 0,
            max_degree: 2,
            allow_negative: false,
            max_rows: Some(4000),
            rows_per_column: Some(10),
            rank_trials: 5,
            alignment_threshold: T::lit(0.99),
            denoise: DenoiseConfig { mu: T::lit(50.0), ..DenoiseConfig::default() },
        }
    }
}

/// Diagnostics for one degree of the growth loop.
#[derive(Clone, Debug)]
pub struct DegreeReport<T> {
    pub degree: u32,
    pub columns: usize,
    pub rows: usize,
    pub test: RankTest<T>,
}

/// Correlation of the generator ratio `ξ_x/ξ_t` with `ẋ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Alignment<T> {
    pub score: T,
    /// `ξ_t` vanished at every sample.
    pub degenerate: bool,
    pub used: usize,
}

/// Generator found by [`detect`], or the diagnostics of a failed search.
#[derive(Clone, Debug)]
pub struct SymmetryResult<T> {
    pub found: bool,
    pub t_basis: BasisSpec,
    pub x_basis: BasisSpec,
    /// Coefficients of `ξ_t` over `t_basis`.
    pub eta_t: Vec<T>,
    /// Coefficients of `ξ_x` over `x_basis`.
    pub eta_x: Vec<T>,
    /// Full spectrum of the scaled raw system.
    pub sigma: Vec<T>,
    pub denoised_sigma: Vec<T>,
    pub gap: T,
    pub alignment: Alignment<T>,
    pub basis_degree: u32,
    /// More than one singular value fell below the rank threshold.
    pub multiple: bool,
    pub skipped_rows: usize,
    pub seed: u64,
    pub degrees: Vec<DegreeReport<T>>,
}

impl<T: Scalar> SymmetryResult<T> {
    pub fn xi_t(&self, t: T, x: T) -> Result<T> {
        self.t_basis.eval_series(&self.eta_t, t, x)
    }

    pub fn xi_x(&self, t: T, x: T) -> Result<T> {
        self.x_basis.eval_series(&self.eta_x, t, x)
    }

    /// Concatenated `(eta_t, eta_x)`.
    pub fn eta(&self) -> Vec<T> {
        self.eta_t.iter().chain(&self.eta_x).copied().collect()
    }
}

/// Weighted Pearson correlation of `ξ_x/ξ_t` with `ẋ` over samples where
/// `|ξ_t|` exceeds `1e-8` of its largest value.
pub fn alignment_score<T: Scalar>(result: &SymmetryResult<T>, samples: &[JetSample<T>]) -> Alignment<T> {
    let vals: Vec<(T, T, T)> = samples
        .iter()
        .filter_map(|s| {
            let a = result.xi_t(s.t, s.x).ok()?;
            let b = result.xi_x(s.t, s.x).ok()?;
            Some((a, b, s.weight))
        })
        .collect();
    let top = vals.iter().map(|v| v.0.abs()).fold(T::zero(), T::max);
    let degenerate = Alignment { score: T::zero(), degenerate: true, used: 0 };
    if top == T::zero() || !top.is_finite() {
        return degenerate;
    }
    let tol = top * T::lit(1e-8);
    let pairs: Vec<(T, T, T)> = samples
        .iter()
        .zip(&vals)
        .filter(|(_, v)| v.0.abs() > tol)
        .map(|(s, v)| (v.1 / v.0, s.xdot, v.2))
        .collect();
    if pairs.is_empty() {
        return degenerate;
    }
    let used = pairs.len();
    let wsum: T = pairs.iter().map(|p| p.2).sum();
    let mr = pairs.iter().map(|p| p.2 * p.0).sum::<T>() / wsum;
    let md = pairs.iter().map(|p| p.2 * p.1).sum::<T>() / wsum;
    let (mut srr, mut sdd, mut srd) = (T::zero(), T::zero(), T::zero());
    for &(r, d, w) in &pairs {
        srr += w * (r - mr) * (r - mr);
        sdd += w * (d - md) * (d - md);
        srd += w * (r - mr) * (d - md);
    }
    let tiny = T::epsilon() * T::lit(1e3);
    let score = if sdd <= tiny * wsum * md.abs().max(T::one()).powi(2) {
        // ẋ is constant: aligned only if the ratio reproduces it
        let worst = pairs.iter().map(|p| (p.0 - p.1).abs()).fold(T::zero(), T::max);
        if worst <= T::lit(1e-6) * md.abs().max(T::one()) {
            T::one()
        } else {
            T::zero()
        }
    } else if srr <= tiny * wsum * mr.abs().max(T::one()).powi(2) {
        T::zero()
    } else {
        (srd / (srr.sqrt() * sdd.sqrt())).max(-T::one()).min(T::one())
    };
    Alignment { score, degenerate: false, used }
}

pub(crate) fn not_found<T: Scalar>(cfg: &DetectConfig<T>, degrees: Vec<DegreeReport<T>>, last: Option<&DeterminingSystem<T>>) -> SymmetryResult<T> {
    let empty = enumerate_basis(0, false);
    let (t_basis, x_basis, skipped) = match last {
        Some(s) => (s.t_basis.clone(), s.x_basis.clone(), s.skipped_rows),
        None => (empty.clone(), empty, 0),
    };
    let last_test = degrees.last().map(|d| d.test.clone());
    SymmetryResult {
        found: false,
        t_basis,
        x_basis,
        eta_t: Vec::new(),
        eta_x: Vec::new(),
        sigma: last.and_then(|s| singular_values(&s.b).ok()).unwrap_or_default(),
        denoised_sigma: last_test.as_ref().map(|t| t.denoised_sigma.clone()).unwrap_or_default(),
        gap: last_test.map_or(T::one(), |t| t.gap),
        alignment: Alignment { score: T::zero(), degenerate: true, used: 0 },
        basis_degree: degrees.last().map_or(cfg.min_degree, |d| d.degree),
        multiple: false,
        skipped_rows: skipped,
        seed: cfg.denoise.seed,
        degrees,
    }
}

pub(crate) fn search<T: Scalar>(
    samples: &[JetSample<T>],
    cfg: &DetectConfig<T>,
    with_evolution: bool,
) -> Result<SymmetryResult<T>> {
    cfg.denoise.validate()?;
    if cfg.max_degree < cfg.min_degree {
        return Err(Error::Invalid("max_degree below min_degree".into()));
    }
    let mut degrees = Vec::new();
    let mut last: Option<DeterminingSystem<T>> = None;
    for d in cfg.min_degree..=cfg.max_degree {
        let basis = enumerate_basis(d, cfg.allow_negative);
        let sys = match assemble_with(samples, &basis, &basis, cfg.max_rows, cfg.denoise.seed, with_evolution) {
            Ok(s) => s,
            Err(Error::TooFewRows { .. }) if d > cfg.min_degree => break,
            Err(e) => return Err(e),
        };
        let test = rank_deficiency_test(&sys, &cfg.denoise, cfg.rows_per_column, cfg.rank_trials)?;
        let hit = test.null_count >= 1 && test.null_count < sys.cols();
        degrees.push(DegreeReport { degree: d, columns: sys.cols(), rows: sys.b.rows(), test: test.clone() });
        if hit {
            return finish(samples, cfg, sys, test, d, degrees);
        }
        last = Some(sys);
    }
    Ok(not_found(cfg, degrees, last.as_ref()))
}

fn finish<T: Scalar>(
    samples: &[JetSample<T>],
    cfg: &DetectConfig<T>,
    sys: DeterminingSystem<T>,
    test: RankTest<T>,
    degree: u32,
    degrees: Vec<DegreeReport<T>>,
) -> Result<SymmetryResult<T>> {
    let nv = null_vector(&sys.b)?;
    let mut eta = sys.unscale(&nv);
    let nrm = norm2(&eta);
    eta.iter_mut().for_each(|v| *v /= nrm);
    orient(&mut eta);
    let nt = sys.t_basis.len();
    let mut res = SymmetryResult {
        found: true,
        t_basis: sys.t_basis.clone(),
        x_basis: sys.x_basis.clone(),
        eta_t: eta[..nt].to_vec(),
        eta_x: eta[nt..].to_vec(),
        sigma: singular_values(&sys.b)?,
        denoised_sigma: test.denoised_sigma,
        gap: test.gap,
        alignment: Alignment { score: T::zero(), degenerate: true, used: 0 },
        basis_degree: degree,
        multiple: test.null_count > 1,
        skipped_rows: sys.skipped_rows,
        seed: cfg.denoise.seed,
        degrees,
    };
    res.alignment = alignment_score(&res, samples);
    Ok(res)
}

/// Grows both expansions together from `min_degree`, stopping at the first
/// degree whose denoised system loses rank; the generator is the least
/// significant right singular vector of the raw (scaled) system, mapped back
/// to basis coefficients.
pub fn detect<T: Scalar>(samples: &[JetSample<T>], cfg: &DetectConfig<T>) -> Result<SymmetryResult<T>> {
    search(samples, cfg, false)
}
