//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use liesym::completion::{corrupt, recover, GrayImage};
use liesym::jetspace::{derivative_samples, estimate_normals, DerivativeMethod, NormalConfig};
use liesym::linalg::{singular_values, svd, DenseMatrix};
use liesym::rng::{gaussian_vec, seeded};
use liesym::sparseopt::{
    bregman_solve, ista_solve, map_shrinkage, matrix_denoise, soft_threshold, DenoiseConfig, MeasurementOperator,
};
use liesym::symmetry::{detect, evolution_generator, model_readout, DetectConfig, Grid};
use liesym::synth::{eval_rhs, integrate_rk4, sample_trajectories, RhsSpec};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

type Check = Result<String, String>;

/// Criterion number, optional wall-clock limit and the check itself.
type Entry = (u32, Option<Duration>, Box<dyn Fn() -> Check>);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn liesym(args: &[&str]) -> Result<i32, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_liesym")).args(args).output().map_err(|e| e.to_string())?;
    o.status.code().ok_or_else(|| "killed by signal".to_string())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read_json(path: &Path) -> Result<Value, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn riccati(t: f64, x: f64) -> f64 {
    2.0 * x / t - t * t * x * x
}

/// Residual of the first-order determining equation
/// `ξ f_t + η f_x = η_t + (η_x − ξ_t) f − ξ_x f²` for `ξ = t, η = −3x`.
fn scaling_residual(t: f64, x: f64) -> f64 {
    let f_t = -2.0 * x / (t * t) - 2.0 * t * x * x;
    let f_x = 2.0 / t - 2.0 * t * t * x;
    t * f_t - 3.0 * x * f_x - (-3.0 - 1.0) * riccati(t, x)
}

/// |cos| between a discovered generator and `(ξ_t, ξ_x) = (t, −3x)`.
fn scaling_cosine(sym: &Value) -> Result<f64, String> {
    let coefs = |key: &str| -> Result<Vec<f64>, String> {
        serde_json::from_value(sym[key].clone()).map_err(|e| format!("{key}: {e}"))
    };
    let basis = |key: &str| -> Result<Vec<(i64, i64)>, String> {
        serde_json::from_value(sym[key].clone()).map_err(|e| format!("{key}: {e}"))
    };
    let (et, ex) = (coefs("eta_t")?, coefs("eta_x")?);
    let (bt, bx) = (basis("t_basis")?, basis("x_basis")?);
    // monomial t^a x^b is stored as [a, b]
    let want_t: Vec<f64> = bt.iter().map(|&i| if i == (1, 0) { 1.0 } else { 0.0 }).collect();
    let want_x: Vec<f64> = bx.iter().map(|&i| if i == (0, 1) { -3.0 } else { 0.0 }).collect();
    let got: Vec<f64> = et.iter().chain(&ex).copied().collect();
    let want: Vec<f64> = want_t.iter().chain(&want_x).copied().collect();
    let dot: f64 = got.iter().zip(&want).map(|(a, b)| a * b).sum();
    Ok(dot.abs() / (norm(&got) * norm(&want)))
}

fn discover_riccati(work: &Path, sigma: f64, config: Option<&str>) -> Result<Value, String> {
    let gen = work.join("gen");
    let seed = "11";
    let code = liesym(&["generate", "--out", p(&gen), "--sigma", &sigma.to_string(), "--seed", seed])?;
    ensure(code == 0, format!("generate exited {code}"))?;
    let input = gen.join("trajectories.csv");
    let mut args = vec!["discover", "--out", p(work), "--input", p(&input), "--seed", seed];
    let cfg_path = work.join("discover.cfg.json");
    if let Some(c) = config {
        fs::write(&cfg_path, c).map_err(|e| e.to_string())?;
        args.extend(["--config", p(&cfg_path)]);
    }
    let code = liesym(&args)?;
    ensure(code == 0, format!("discover exited {code}"))?;
    read_json(&work.join("discover.json"))
}

fn criterion_1(work: &Path) -> Check {
    for &(t, x) in &[(1.0, 0.3), (1.3, 2.0), (1.9, 0.05), (1.5, 4.0)] {
        ensure((eval_rhs(&RhsSpec::riccati(), t, x).unwrap() - riccati(t, x)).abs() <= 1e-12, "rhs mismatch")?;
        ensure(scaling_residual(t, x).abs() <= 1e-12, "analytic generator fails the determining equation")?;
    }
    let r = discover_riccati(work, 0.0, None)?;
    let sym = &r["symmetry"];
    ensure(sym["found"] == true, "no symmetry found")?;
    let cos = scaling_cosine(sym)?;
    ensure(cos >= 0.99, format!("cosine {cos:.6}"))?;
    Ok(format!("cosine {cos:.6} at degree {}", sym["basis_degree"]))
}

fn criterion_2(work: &Path) -> Check {
    let cfg = r#"{"derivative": {"local_poly": {"window": 121, "degree": 4}}}"#;
    let r = discover_riccati(work, 1e-3, Some(cfg))?;
    let sym = &r["symmetry"];
    ensure(sym["found"] == true, "no symmetry found")?;
    let cos = scaling_cosine(sym)?;
    ensure(cos >= 0.95, format!("cosine {cos:.6}"))?;
    let test = &sym["degrees"].as_array().and_then(|d| d.last()).ok_or("no degree report")?["rank_test"];
    ensure(test["deficient_by_one"] == true, "denoised spectrum not deficient by one")?;
    let raw: Vec<f64> = serde_json::from_value(test["raw_sigma"].clone()).map_err(|e| e.to_string())?;
    let ratio = raw[raw.len() - 1] / raw[0];
    ensure(ratio > 1e-4, format!("raw spectrum already passes the gate ({ratio:.3e})"))?;
    Ok(format!("cosine {cos:.6}, raw σ_n/σ_1 {ratio:.2e} fails the 1e-4 gate, denoised passes"))
}

fn readout_error(rhs: RhsSpec<f64>, truth: impl Fn(f64, f64) -> f64) -> Result<f64, String> {
    let x0 = [0.5, 1.0, 1.5, 2.0, 3.0];
    let trajs: Vec<_> =
        sample_trajectories(&rhs, 1.0, 2.0, &x0, 200, 4).map_err(|e| e.to_string())?.into_iter().map(|p| p.0).collect();
    let ds = derivative_samples(&trajs, DerivativeMethod::Central).map_err(|e| e.to_string())?;
    let nm = estimate_normals(&ds, &NormalConfig::default()).map_err(|e| e.to_string())?;
    let cfg = DetectConfig::default();
    let r = evolution_generator(&nm.samples, &cfg).map_err(|e| e.to_string())?;
    let grid = Grid::covering(&nm.samples, 20);
    let out = model_readout(&r, &nm.samples, &grid, cfg.alignment_threshold).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (i, &t) in grid.t.iter().enumerate() {
        for (j, &x) in grid.x.iter().enumerate() {
            let f = truth(t, x);
            let v = out.values[i][j].ok_or("undefined grid value")?;
            worst = worst.max((v - f).abs() / f.abs());
        }
    }
    Ok(worst)
}

fn criterion_3() -> Check {
    let ex = readout_error(RhsSpec::linear_x(), |_, x| x)?;
    let et = readout_error(RhsSpec::linear_t(), |t, _| t)?;
    ensure(ex <= 1e-4 && et <= 1e-4, format!("f = x: {ex:.2e}, f = t: {et:.2e}"))?;

    let trajs: Vec<_> = sample_trajectories(&RhsSpec::riccati(), 1.0, 2.0, &[0.15, 0.4, 1.0, 2.0, 4.0], 400, 4)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|p| p.0)
        .collect();
    let ds = derivative_samples(&trajs, DerivativeMethod::Central).map_err(|e| e.to_string())?;
    let nm = estimate_normals(&ds, &NormalConfig::default()).map_err(|e| e.to_string())?;
    let cfg = DetectConfig::default();
    let r = detect(&nm.samples, &cfg).map_err(|e| e.to_string())?;
    ensure(r.found, "no Riccati generator")?;
    let grid = Grid::covering(&nm.samples, 20);
    let alignment = match model_readout(&r, &nm.samples, &grid, cfg.alignment_threshold) {
        Err(liesym::Error::ReadoutRefused { alignment, .. }) => alignment,
        other => return Err(format!("Riccati readout not refused: {other:?}")),
    };
    ensure(alignment < 0.99, format!("alignment {alignment}"))?;
    Ok(format!("max rel error f = x {ex:.2e}, f = t {et:.2e}; Riccati refused at alignment {alignment:.4}"))
}

/// Indices of the `k` largest entries of a seeded Gaussian vector.
fn seeded_support(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let g: Vec<f64> = gaussian_vec(&mut seeded(seed), n);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| g[b].abs().total_cmp(&g[a].abs()));
    let mut s = idx[..k].to_vec();
    s.sort_unstable();
    s
}

fn solve3(g: [[f64; 3]; 3], r: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(g);
    if d.abs() < 1e-12 {
        return None;
    }
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let mut m = g;
        for row in 0..3 {
            m[row][c] = r[row];
        }
        *o = det(m) / d;
    }
    Some(out)
}

/// Every 3-column support that reproduces `y` exactly, with its coefficients.
fn exhaustive(a: &DenseMatrix<f64>, y: &[f64]) -> Vec<([usize; 3], [f64; 3])> {
    let n = a.cols();
    let cols: Vec<Vec<f64>> = (0..n).map(|j| a.col(j)).collect();
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, q)| p * q).sum::<f64>();
    let mut hits = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let c = [&cols[i], &cols[j], &cols[k]];
                let g = [0, 1, 2].map(|p| [0, 1, 2].map(|q| dot(c[p], c[q])));
                let r = [0, 1, 2].map(|p| dot(c[p], y));
                let Some(coef) = solve3(g, r) else { continue };
                let res: Vec<f64> = (0..y.len()).map(|row| y[row] - (0..3).map(|p| coef[p] * c[p][row]).sum::<f64>()).collect();
                if norm(&res) <= 1e-9 * norm(y) {
                    hits.push(([i, j, k], coef));
                }
            }
        }
    }
    hits
}

fn criterion_4() -> Check {
    let op = MeasurementOperator::<f64>::gaussian(32, 64, 404);
    let MeasurementOperator::Dense(a) = &op else { return Err("expected a dense operator".into()) };
    let support = seeded_support(64, 3, 405);
    let signs: Vec<f64> = gaussian_vec(&mut seeded(406), 3);
    let mut xs = vec![0.0; 64];
    for (&i, s) in support.iter().zip(&signs) {
        xs[i] = if *s >= 0.0 { 1.0 } else { -1.0 };
    }
    let y = op.apply(&xs);
    let oracle = exhaustive(a, &y);
    ensure(oracle.len() == 1, format!("oracle found {} supports", oracle.len()))?;
    let (osupp, ocoef) = oracle[0];
    ensure(osupp.to_vec() == support, "oracle support differs from the planted one")?;

    let t0 = Instant::now();
    let cfg = DenoiseConfig { mu: 10.0, tol: 1e-10, ..DenoiseConfig::default() };
    let out = bregman_solve(&op, &y, &cfg).map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed();
    let found: Vec<usize> = (0..64).filter(|&i| out.x[i].abs() > 1e-6).collect();
    ensure(found == support, format!("support {found:?} vs {support:?}"))?;
    let mut oracle_x = vec![0.0; 64];
    for (i, c) in osupp.iter().zip(ocoef) {
        oracle_x[*i] = c;
    }
    let err = norm(&out.x.iter().zip(&oracle_x).map(|(p, q)| p - q).collect::<Vec<_>>());
    ensure(err <= 1e-3, format!("‖x − x*‖ = {err:.2e}"))?;
    ensure(elapsed <= Duration::from_secs(5), format!("solver took {elapsed:?}"))?;
    Ok(format!("support {support:?}, ‖x − x*‖ = {err:.2e}"))
}

fn criterion_5() -> Check {
    let (m, n) = (20, 10);
    let rand = |r: usize, c: usize, seed: u64| DenseMatrix::<f64>::new(r, c, gaussian_vec(&mut seeded(seed), r * c)).unwrap();
    let q = svd(&rand(m, 2, 51)).map_err(|e| e.to_string())?.u;
    let w = svd(&rand(n, 2, 52)).map_err(|e| e.to_string())?.u;
    let noise = rand(m, n, 53);
    let b = DenseMatrix::from_fn(m, n, |i, j| {
        q[(i, 0)] * w[(j, 0)] + 0.5 * q[(i, 1)] * w[(j, 1)] + 1e-3 * noise[(i, j)]
    });
    let raw = singular_values(&b).map_err(|e| e.to_string())?;
    let t0 = Instant::now();
    let cfg = DenoiseConfig { mu: 5.0, projections_p: Some(m * n / 2), ..DenoiseConfig::default() };
    let out = matrix_denoise(&b, &cfg).map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed();
    let s = singular_values(&out.matrix).map_err(|e| e.to_string())?;
    let ratio = s[2] / s[0];
    ensure(ratio <= 1e-3, format!("σ₃/σ₁ = {ratio:.2e}"))?;
    ensure(elapsed <= Duration::from_secs(5), format!("denoising took {elapsed:?}"))?;
    Ok(format!("σ₃/σ₁ raw {:.2e} → denoised {ratio:.2e}", raw[2] / raw[0]))
}

fn criterion_6() -> Check {
    let (w, h) = (32, 32);
    let mut px = vec![0.5; w * h];
    for k in 1..3 {
        let f = k as f64;
        for i in 0..h {
            for j in 0..w {
                let u = (f * i as f64 / h as f64 * 2.3 + 0.4 * f).sin();
                let v = (f * j as f64 / w as f64 * 1.7 + 0.9 * f).cos();
                px[i * w + j] += 0.3 / f * u * v;
            }
        }
    }
    let truth = GrayImage::new(w, h, px).map_err(|e| e.to_string())?;
    let s = singular_values(&truth.to_matrix()).map_err(|e| e.to_string())?;
    ensure(s[2] / s[0] > 1e-3 && s[3] / s[0] < 1e-12, "planted image is not rank 3")?;
    let t0 = Instant::now();
    let (bad, mask) = corrupt(&truth, 0.5, 61).map_err(|e| e.to_string())?;
    let out = recover(&bad, &mask, &DenoiseConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed();
    let num: f64 = out.image.pixels.iter().zip(&truth.pixels).map(|(p, q)| (p - q) * (p - q)).sum();
    let den: f64 = truth.pixels.iter().map(|q| q * q).sum();
    let err = (num / den).sqrt();
    ensure(err <= 0.05, format!("relative error {err:.3e}"))?;
    ensure(elapsed <= Duration::from_secs(60), format!("recovery took {elapsed:?}"))?;
    Ok(format!("{} pixels corrupted, relative error {err:.3e}", mask.iter().filter(|&&m| m).count()))
}

fn criterion_7() -> Check {
    let mut rng = seeded(70);
    let mut worst: f64 = 0.0;
    for k in 0..1000u64 {
        let dims = gaussian_vec::<f64>(&mut rng, 2);
        let rows = 1 + ((dims[0].abs() * 1e6) as usize % 64);
        let cols = 1 + ((dims[1].abs() * 1e6) as usize % 32);
        let a = DenseMatrix::<f64>::new(rows, cols, gaussian_vec(&mut seeded(1000 + k), rows * cols)).unwrap();
        let s = svd(&a).map_err(|e| e.to_string())?;
        let scale = a.frobenius().max(1.0);
        let eye = DenseMatrix::<f64>::identity(s.sigma.len());
        let rec = s.reconstruct().sub(&a).unwrap().frobenius() / scale;
        let ou = s.u.transpose().matmul(&s.u).unwrap().sub(&eye).unwrap().frobenius();
        let ov = s.vt.matmul(&s.vt.transpose()).unwrap().sub(&eye).unwrap().frobenius();
        worst = worst.max(rec).max(ou).max(ov);
    }
    ensure(worst <= 1e-10, format!("SVD error {worst:.2e}"))?;

    let op = MeasurementOperator::dense(DenseMatrix::new(20, 40, gaussian_vec(&mut seeded(71), 800)).unwrap());
    let y = gaussian_vec(&mut seeded(72), 20);
    let ista = ista_solve(&op, &y, &DenoiseConfig { mu: 2.0, ..DenoiseConfig::default() }).map_err(|e| e.to_string())?;
    ensure(ista.objective.len() > 1, "no ISTA objective logged")?;
    let rises = ista.objective.windows(2).filter(|w| w[1] > w[0] * (1.0 + 1e-12)).count();
    ensure(rises == 0, format!("ISTA objective rose {rises} times"))?;

    let mut checked = 0;
    for &sg in &[0.1, 0.5, 1.0, 2.0] {
        for &sl in &[0.25, 1.0, 3.0] {
            let tau = 2f64.sqrt() * sg * sg / sl;
            let xs: Vec<f64> = (-200..=200).map(|i| i as f64 * 0.013).collect();
            let st = soft_threshold(&xs, tau);
            for (x, s) in xs.iter().zip(&st) {
                ensure(map_shrinkage(*x, sg, sl).to_bits() == s.to_bits(), format!("shrinkage differs at {x}"))?;
                checked += 1;
            }
        }
    }

    let e = integrate_rk4(&RhsSpec::<f64>::linear_x(), 0.0, 1.0, 1.0, 1000).map_err(|e| e.to_string())?.trajectory;
    let exp_err = e.times.iter().zip(&e.states).map(|(t, x)| (x - t.exp()).abs()).fold(0.0, f64::max);
    let mut ric_err: f64 = 0.0;
    for k in [1.0f64, 5.0, 30.0] {
        let tr = integrate_rk4(&RhsSpec::<f64>::riccati(), 1.0, 5.0 / (1.0 + k), 2.0, 1000).map_err(|e| e.to_string())?.trajectory;
        for (t, x) in tr.times.iter().zip(&tr.states) {
            ric_err = ric_err.max((x - 5.0 * t * t / (t.powi(5) + k)).abs());
        }
    }
    ensure(exp_err <= 1e-8 && ric_err <= 1e-8, format!("RK4 errors e^t {exp_err:.2e}, Riccati {ric_err:.2e}"))?;
    Ok(format!(
        "SVD {worst:.1e} over 1000 matrices, ISTA monotone over {} steps, {checked} shrinkage values identical, RK4 {exp_err:.1e}/{ric_err:.1e}",
        ista.objective.len()
    ))
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        out.insert(path.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&path).unwrap());
    }
    out
}

fn criterion_8(work: &Path) -> Check {
    let traj = work.join("traj.csv");
    let gen = work.join("seed");
    ensure(liesym(&["generate", "--out", p(&gen), "--sigma", "1e-3", "--seed", "3", "--points", "200"])? == 0, "generate failed")?;
    fs::copy(gen.join("trajectories.csv"), &traj).map_err(|e| e.to_string())?;

    let img = work.join("img.pgm");
    let mut bytes = b"P5\n24 20\n255\n".to_vec();
    bytes.extend((0..24 * 20).map(|k| {
        let (i, j) = ((k / 24) as f64, (k % 24) as f64);
        (128.0 + 60.0 * (i / 5.0).sin() * (j / 7.0).cos() + 30.0 * (i / 3.0).cos()) as u8
    }));
    fs::write(&img, bytes).map_err(|e| e.to_string())?;

    let mat = work.join("m.csv");
    let g: Vec<f64> = gaussian_vec(&mut seeded(80), 30);
    let text: String = (0..10).map(|i| format!("{},{},{}\n", g[3 * i], g[3 * i + 1], g[3 * i] + g[3 * i + 1])).collect();
    fs::write(&mat, text).map_err(|e| e.to_string())?;

    let runs: Vec<Vec<&str>> = vec![
        vec!["generate", "--sigma", "1e-3", "--seed", "9"],
        vec!["discover", "--input", p(&traj), "--seed", "2", "--readout"],
        vec!["complete", "--input", p(&img), "--seed", "4"],
        vec!["denoise", "--input", p(&mat), "--seed", "6"],
    ];
    let mut files = 0;
    for (k, args) in runs.iter().enumerate() {
        let mut snaps = Vec::new();
        for rep in 0..2 {
            let out = work.join(format!("run{k}_{rep}"));
            let mut full = args.clone();
            full.extend(["--out", p(&out)]);
            let code = liesym(&full)?;
            ensure(code != 2, format!("{} rejected its input", args[0]))?;
            snaps.push(snapshot(&out));
        }
        ensure(!snaps[0].is_empty(), format!("{} wrote nothing", args[0]))?;
        ensure(snaps[0] == snaps[1], format!("{} output differs between runs", args[0]))?;
        files += snaps[0].len();
    }
    Ok(format!("4 commands, {files} output files byte-identical"))
}

fn main() {
    let root = tempfile::tempdir().expect("temp dir");
    let dir = |name: &str| {
        let d = root.path().join(name);
        fs::create_dir_all(&d).unwrap();
        d
    };
    let checks: Vec<Entry> = vec![
        (1, Some(Duration::from_secs(30)), Box::new({
            let d = dir("c1");
            move || criterion_1(&d)
        })),
        (2, None, Box::new({
            let d = dir("c2");
            move || criterion_2(&d)
        })),
        (3, None, Box::new(criterion_3)),
        (4, None, Box::new(criterion_4)),
        (5, None, Box::new(criterion_5)),
        (6, None, Box::new(criterion_6)),
        (7, None, Box::new(criterion_7)),
        (8, None, Box::new({
            let d = dir("c8");
            move || criterion_8(&d)
        })),
    ];
    let mut failed = 0;
    for (id, limit, check) in checks {
        let t0 = Instant::now();
        let mut outcome = check();
        let elapsed = t0.elapsed();
        if let (Ok(msg), Some(limit)) = (&outcome, limit) {
            if elapsed > limit {
                outcome = Err(format!("{msg}, but took {elapsed:?} > {limit:?}"));
            }
        }
        match outcome {
            Ok(msg) => println!("criterion {id}: PASS ({msg}; {:.2} s)", elapsed.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("criterion {id}: FAIL ({msg}; {:.2} s)", elapsed.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
