use crate::config::{CompleteConfig, DenoiseCmdConfig, DiscoverConfig, GenerateConfig, ReadoutSource};
use crate::json::Json;
use anyhow::{anyhow, bail, Context, Result};
use liesym::basis::{BasisSpec, MultiIndex};
use liesym::completion::{corrupt, read_pgm, recover, truncate_rank, write_pgm};
use liesym::jetspace::{derivative_samples, estimate_normals, read_trajectories, write_trajectories};
use liesym::symmetry::{detect, evolution_generator, model_readout, rank_test_matrix, Grid, RankTest};
use liesym::synth::{add_noise_indexed, sample_trajectories};
use liesym::{GrayImage, JetSample, Matrix, RhsSpec, SymmetryResult};
use std::fs;
use std::path::Path;

pub const EXIT_OK: u8 = 0;
pub const EXIT_NO_DETECTION: u8 = 3;
pub const EXIT_NOT_CONVERGED: u8 = 4;

fn write(out: &Path, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
    let path = out.join(name);
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn rhs_from(cfg: &GenerateConfig) -> Result<RhsSpec> {
    match &cfg.terms {
        Some(terms) => Ok(RhsSpec::new(
            terms.iter().map(|t| (t.coef, MultiIndex::new(t.t_pow, t.x_pow))).collect(),
            Some("inline".into()),
        )?),
        None => RhsSpec::builtin(&cfg.equation).ok_or_else(|| anyhow!("unknown equation {:?}", cfg.equation)),
    }
}

pub fn generate(cfg: &GenerateConfig, out: &Path) -> Result<u8> {
    let rhs = rhs_from(cfg)?;
    if !(cfg.sigma >= 0.0) {
        bail!("sigma must be non-negative");
    }
    let runs = sample_trajectories(&rhs, cfg.t0, cfg.t1, &cfg.initial, cfg.points, cfg.substeps)?;
    let truncated: Vec<usize> = runs.iter().enumerate().filter(|(_, r)| r.1).map(|(i, _)| i).collect();
    let trajs: Vec<_> =
        runs.into_iter().enumerate().map(|(i, (tr, _))| add_noise_indexed(&tr, cfg.sigma, cfg.seed, i)).collect();
    let mut csv = Vec::new();
    write_trajectories(&mut csv, &trajs)?;
    write(out, &cfg.output, csv)?;
    let points: usize = trajs.iter().map(|t| t.len()).sum();
    let summary = Json::obj()
        .with("command", "generate")
        .with("config", Json::from_serde(cfg))
        .with("seed", cfg.seed)
        .with("trajectories", trajs.len())
        .with("points", points)
        .with("sigma", cfg.sigma)
        .with("truncated", Json::Arr(truncated.iter().map(|&i| Json::from(i)).collect()));
    write(out, "generate.json", summary.render())?;
    println!(
        "wrote {} trajectories, {points} points, sigma {}, seed {} to {}",
        trajs.len(),
        cfg.sigma,
        cfg.seed,
        out.join(&cfg.output).display()
    );
    Ok(EXIT_OK)
}

fn monomial(idx: MultiIndex) -> String {
    let pow = |v: &str, p: i32| match p {
        0 => None,
        1 => Some(v.to_owned()),
        p => Some(format!("{v}^{p}")),
    };
    let parts: Vec<String> = [pow("t", idx.a), pow("x", idx.b)].into_iter().flatten().collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("·")
    }
}

fn series(basis: &BasisSpec, coeffs: &[f64], scale: f64, floor: f64) -> String {
    let terms: Vec<String> = basis
        .indices()
        .iter()
        .zip(coeffs)
        .filter(|(_, c)| c.abs() > floor)
        .map(|(&idx, c)| format!("{:.3}·{}", c / scale, monomial(idx)))
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ").replace("+ -", "- ")
    }
}

/// `xi_t = ..., xi_x = ...`, scaled so the dominant `ξ_t` coefficient is 1
/// (or the dominant `ξ_x` one when `ξ_t` vanishes); terms below 1e-3 of the
/// largest coefficient are left out.
pub fn generator_string(r: &SymmetryResult) -> String {
    let dominant = |v: &[f64]| v.iter().copied().fold(0.0f64, |a, c| if c.abs() > a.abs() { c } else { a });
    let top = r.eta().iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let lead_t = dominant(&r.eta_t);
    let scale = if lead_t.abs() > 1e-3 * top { lead_t } else { dominant(&r.eta_x) };
    let floor = 1e-3 * top;
    format!("xi_t = {}, xi_x = {}", series(&r.t_basis, &r.eta_t, scale, floor), series(&r.x_basis, &r.eta_x, scale, floor))
}

fn basis_json(b: &BasisSpec) -> Json {
    Json::Arr(b.indices().iter().map(|i| Json::Arr(vec![Json::Int(i.a as i64), Json::Int(i.b as i64)])).collect())
}

fn rank_json(t: &RankTest<f64>) -> Json {
    Json::obj()
        .with("deficient_by_one", t.deficient_by_one)
        .with("null_count", t.null_count)
        .with("gap", t.gap)
        .with("converged", t.converged)
        .with("iterations", t.iterations)
        .with("rows_used", t.rows_used)
        .with("raw_sigma", &t.raw_sigma)
        .with("denoised_sigma", &t.denoised_sigma)
}

fn symmetry_json(r: &SymmetryResult) -> Json {
    let mut j = Json::obj()
        .with("found", r.found)
        .with("basis_degree", r.basis_degree)
        .with("t_basis", basis_json(&r.t_basis))
        .with("x_basis", basis_json(&r.x_basis))
        .with("eta_t", &r.eta_t)
        .with("eta_x", &r.eta_x)
        .with("sigma", &r.sigma)
        .with("denoised_sigma", &r.denoised_sigma)
        .with("gap", r.gap)
        .with(
            "alignment",
            Json::obj()
                .with("score", r.alignment.score)
                .with("degenerate", r.alignment.degenerate)
                .with("used", r.alignment.used),
        )
        .with("multiple", r.multiple)
        .with("skipped_rows", r.skipped_rows)
        .with("seed", r.seed);
    if r.found {
        j = j.with("generator", generator_string(r));
    }
    j.with(
        "degrees",
        Json::Arr(
            r.degrees
                .iter()
                .map(|d| {
                    Json::obj()
                        .with("degree", d.degree)
                        .with("columns", d.columns)
                        .with("rows", d.rows)
                        .with("rank_test", rank_json(&d.test))
                })
                .collect(),
        ),
    )
}

fn readout_json(cfg: &DiscoverConfig, samples: &[JetSample], detected: &SymmetryResult) -> Result<Json> {
    let source = match cfg.readout_source {
        ReadoutSource::Evolution => evolution_generator(samples, &cfg.detect)?,
        ReadoutSource::Detected => detected.clone(),
    };
    let label = match cfg.readout_source {
        ReadoutSource::Evolution => "evolution",
        ReadoutSource::Detected => "detected",
    };
    let mut j = Json::obj().with("source", label).with("found", source.found);
    if !source.found {
        return Ok(j.with("refused", "no generator to read out"));
    }
    j = j.with("generator", generator_string(&source)).with("alignment", source.alignment.score);
    let grid = Grid::covering(samples, cfg.grid);
    Ok(match model_readout(&source, samples, &grid, cfg.detect.alignment_threshold) {
        Ok(r) => j
            .with("residual_rms", r.residual_rms)
            .with("used_samples", r.used_samples)
            .with("grid_t", &grid.t)
            .with("grid_x", &grid.x)
            .with("values", Json::Arr(r.values.iter().map(|row| Json::Arr(row.iter().map(|&v| v.into()).collect())).collect())),
        Err(e @ liesym::Error::ReadoutRefused { .. }) => j.with("refused", e.to_string()),
        Err(e) => return Err(e.into()),
    })
}

pub fn discover(cfg: &DiscoverConfig, out: &Path) -> Result<u8> {
    let file = fs::File::open(&cfg.input).with_context(|| format!("opening {}", cfg.input))?;
    let trajs = read_trajectories::<f64, _>(file)?;
    let ds = derivative_samples(&trajs, cfg.derivative)?;
    let normals = estimate_normals(&ds, &cfg.normals)?;
    let result = detect(&normals.samples, &cfg.detect)?;
    let mut j = Json::obj()
        .with("command", "discover")
        .with("config", Json::from_serde(cfg))
        .with("seed", cfg.seed)
        .with("trajectories", trajs.len())
        .with("samples", normals.samples.len())
        .with("dropped_samples", normals.dropped)
        .with("symmetry", symmetry_json(&result));
    if cfg.readout {
        j = j.with("readout", readout_json(cfg, &normals.samples, &result)?);
    }
    write(out, "discover.json", j.render())?;
    if result.found {
        println!("{}", generator_string(&result));
        println!("degree {}, alignment {:.4}", result.basis_degree, result.alignment.score);
        Ok(EXIT_OK)
    } else {
        let stalled = result.degrees.last().is_some_and(|d| !d.test.converged);
        println!("no symmetry found at degree <= {}", cfg.detect.max_degree);
        Ok(if stalled { EXIT_NOT_CONVERGED } else { EXIT_NO_DETECTION })
    }
}

fn rel_error(a: &GrayImage, b: &GrayImage) -> f64 {
    let num: f64 = a.pixels.iter().zip(&b.pixels).map(|(p, q)| (p - q) * (p - q)).sum();
    let den: f64 = b.pixels.iter().map(|q| q * q).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

pub fn complete(cfg: &CompleteConfig, out: &Path) -> Result<u8> {
    let bytes = fs::read(&cfg.input).with_context(|| format!("reading {}", cfg.input))?;
    let img: GrayImage = read_pgm(&bytes)?;
    let truncated = truncate_rank(&img, cfg.rank)?;
    let (corrupted, mask) = corrupt(&truncated, cfg.fraction, cfg.seed)?;
    let recovered = recover(&corrupted, &mask, &cfg.denoise)?;
    write(out, "truncated.pgm", write_pgm(&truncated))?;
    write(out, "corrupted.pgm", write_pgm(&corrupted))?;
    write(out, "recovered.pgm", write_pgm(&recovered.image))?;
    let converged = recovered.solver.as_ref().is_none_or(|s| s.converged);
    let err = rel_error(&recovered.image, &truncated);
    let mut metrics = Json::obj()
        .with("command", "complete")
        .with("config", Json::from_serde(cfg))
        .with("seed", cfg.seed)
        .with("width", img.width)
        .with("height", img.height)
        .with("rank", cfg.rank)
        .with("fraction", cfg.fraction)
        .with("corrupted_pixels", mask.iter().filter(|&&m| m).count())
        .with("rel_error_corrupted", rel_error(&corrupted, &truncated))
        .with("rel_error", err)
        .with("converged", converged);
    if let Some(s) = &recovered.solver {
        metrics = metrics.with("iterations", s.iterations).with("outer_iterations", s.outer_iterations);
    }
    write(out, "complete.json", metrics.render())?;
    println!("rank {} fraction {} relative error {err:.3e}", cfg.rank, cfg.fraction);
    Ok(if converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn read_matrix(path: &str) -> Result<Matrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {path}"))?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("{path}: row {}", i + 1))?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| anyhow!("{path}: row {}: bad number {f:?}", i + 1)))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("{path}: empty matrix");
    }
    Ok(Matrix::from_rows(&rows)?)
}

pub fn denoise(cfg: &DenoiseCmdConfig, out: &Path) -> Result<u8> {
    let b = read_matrix(&cfg.input)?;
    if !b.is_finite() {
        bail!("{}: non-finite entries", cfg.input);
    }
    let test = rank_test_matrix(&b, &cfg.denoise)?;
    let degenerate = test.raw_sigma.first().is_none_or(|&s| s == 0.0);
    let j = Json::obj()
        .with("command", "denoise")
        .with("config", Json::from_serde(cfg))
        .with("seed", cfg.seed)
        .with("rows", b.rows())
        .with("cols", b.cols())
        .with("degenerate", degenerate)
        .with("rank_test", rank_json(&test));
    write(out, "denoise.json", j.render())?;
    println!(
        "deficient by one: {} (null count {}, converged {}{})",
        test.deficient_by_one,
        test.null_count,
        test.converged,
        if degenerate { ", zero matrix" } else { "" }
    );
    Ok(if test.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_text() {
        let b = liesym::basis::enumerate_basis(1, false);
        let r = SymmetryResult {
            found: true,
            t_basis: b.clone(),
            x_basis: b,
            eta_t: vec![0.0, 0.0, 0.5],
            eta_x: vec![0.0, -1.5, 1e-9],
            sigma: vec![],
            denoised_sigma: vec![],
            gap: 1.0,
            alignment: liesym::symmetry::Alignment { score: 0.0, degenerate: false, used: 0 },
            basis_degree: 1,
            multiple: false,
            skipped_rows: 0,
            seed: 0,
            degrees: vec![],
        };
        assert_eq!(generator_string(&r), "xi_t = 1.000·t, xi_x = -3.000·x");
        assert_eq!(monomial(MultiIndex::new(-1, 2)), "t^-1·x^2");
        assert_eq!(monomial(MultiIndex::new(0, 0)), "1");
    }
}
