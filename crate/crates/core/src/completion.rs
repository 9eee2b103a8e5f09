//! Low-rank image experiment: rank truncation, salt-and-pepper corruption and
//! nuclear-norm recovery from the clean pixels, with PGM input/output.

use crate::error::{Error, Result};
use crate::linalg::{svd, DenseMatrix};
use crate::rng::seeded;
use crate::scalar::Scalar;
use crate::sparseopt::{nuclear_bregman, DenoiseConfig, DenoiseOutcome, MeasurementOperator};
use rand::seq::index::sample;
use rand::Rng;

/// Grayscale image, row-major, intensities nominally in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage<T> {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<T>,
}

impl<T: Scalar> GrayImage<T> {
    pub fn new(width: usize, height: usize, pixels: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(Error::Dimension(format!("{} pixels for a {width}x{height} image", pixels.len())));
        }
        if pixels.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("image"));
        }
        Ok(Self { width, height, pixels })
    }

    /// `height × width` matrix view.
    pub fn to_matrix(&self) -> DenseMatrix<T> {
        DenseMatrix::new(self.height, self.width, self.pixels.clone()).expect("validated image")
    }

    pub fn from_matrix(m: &DenseMatrix<T>) -> Self {
        Self { width: m.cols(), height: m.rows(), pixels: m.as_slice().to_vec() }
    }

    pub fn clamped(mut self) -> Self {
        self.pixels.iter_mut().for_each(|p| *p = p.max(T::zero()).min(T::one()));
        self
    }
}

/// Keeps the top `r` singular triples, then clamps to `[0, 1]`.
pub fn truncate_rank<T: Scalar>(img: &GrayImage<T>, r: usize) -> Result<GrayImage<T>> {
    let max = img.width.min(img.height);
    if r == 0 || r > max {
        return Err(Error::RankOutOfRange { r, max });
    }
    let mut s = svd(&img.to_matrix())?;
    s.sigma.iter_mut().skip(r).for_each(|v| *v = T::zero());
    Ok(GrayImage::from_matrix(&s.reconstruct()).clamped())
}

/// Overwrites `⌊fraction·N⌋` distinct pixels with 0 or 1 (even odds).
///
/// The mask is `true` at corrupted positions.
pub fn corrupt<T: Scalar>(img: &GrayImage<T>, fraction: T, seed: u64) -> Result<(GrayImage<T>, Vec<bool>)> {
    if !(fraction >= T::zero() && fraction <= T::one()) {
        return Err(Error::Invalid("fraction must lie in [0, 1]".into()));
    }
    let n = img.pixels.len();
    let count = (fraction * T::from_usize_lossy(n)).floor().to_usize().unwrap_or(0).min(n);
    let mut rng = seeded(seed);
    let mut out = img.clone();
    let mut mask = vec![false; n];
    for i in sample(&mut rng, n, count) {
        mask[i] = true;
        out.pixels[i] = if rng.random_bool(0.5) { T::one() } else { T::zero() };
    }
    Ok((out, mask))
}

/// Recovery result with solver diagnostics.
#[derive(Clone, Debug)]
pub struct Recovery<T> {
    pub image: GrayImage<T>,
    pub solver: Option<DenoiseOutcome<T>>,
}

/// Nuclear-norm completion from the pixels outside `mask`, with Bregman
/// add-back so the clean pixels act as hard constraints. An empty mask
/// returns the input unchanged.
pub fn recover<T: Scalar>(corrupted: &GrayImage<T>, mask: &[bool], cfg: &DenoiseConfig<T>) -> Result<Recovery<T>> {
    let (h, w) = (corrupted.height, corrupted.width);
    if mask.len() != h * w {
        return Err(Error::Dimension("mask length differs from pixel count".into()));
    }
    if !mask.iter().any(|&m| m) {
        return Ok(Recovery { image: corrupted.clone(), solver: None });
    }
    // column-stacked index of every clean pixel
    let mut known = Vec::new();
    let mut y = Vec::new();
    for j in 0..w {
        for i in 0..h {
            if !mask[i * w + j] {
                known.push(j * h + i);
                y.push(corrupted.pixels[i * w + j]);
            }
        }
    }
    let op = MeasurementOperator::sampling(h * w, known)?;
    let out = nuclear_bregman(&op, &y, (h, w), cfg)?;
    let image = GrayImage::from_matrix(&out.matrix).clamped();
    Ok(Recovery { image, solver: Some(out) })
}

/// Parses P2 (ASCII) or P5 (binary) with maxval ≤ 255.
pub fn read_pgm<T: Scalar>(bytes: &[u8]) -> Result<GrayImage<T>> {
    let mut pos = 0;
    let mut token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Pgm("unexpected end of header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token()?;
    let mut num = |what: &str| -> Result<usize> {
        token()?.parse::<usize>().map_err(|_| Error::Pgm(format!("bad {what}")))
    };
    let width = num("width")?;
    let height = num("height")?;
    let maxval = num("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Pgm("empty image".into()));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::Pgm(format!("maxval {maxval} unsupported (1..=255)")));
    }
    let n = width * height;
    let scale = T::from_usize_lossy(maxval);
    let raw: Vec<usize> = match magic.as_str() {
        "P5" => {
            // exactly one whitespace byte separates the header from the raster
            let start = pos + 1;
            if bytes.len() < start + n {
                return Err(Error::Pgm("truncated raster".into()));
            }
            bytes[start..start + n].iter().map(|&b| b as usize).collect()
        }
        "P2" => (0..n).map(|_| num("pixel")).collect::<Result<_>>()?,
        other => return Err(Error::Pgm(format!("unsupported magic {other:?}"))),
    };
    if raw.iter().any(|&v| v > maxval) {
        return Err(Error::Pgm("pixel above maxval".into()));
    }
    GrayImage::new(width, height, raw.into_iter().map(|v| T::from_usize_lossy(v) / scale).collect())
}

/// Encodes as binary P5 with maxval 255, clamping and rounding each pixel.
pub fn write_pgm<T: Scalar>(img: &GrayImage<T>) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    let s = T::lit(255.0);
    out.extend(img.pixels.iter().map(|&p| (p.max(T::zero()).min(T::one()) * s).round().to_u8().unwrap_or(0)));
    out
}
