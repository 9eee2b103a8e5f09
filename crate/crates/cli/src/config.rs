//! Per-command JSON configs. Each file holds one command's object; unknown
//! keys are rejected and flags override what the file says.

use anyhow::{Context, Result};
use liesym::jetspace::{DerivativeMethod, NormalConfig};
use liesym::{DenoiseConfig, DetectConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub fn load<C: DeserializeOwned + Default>(path: Option<&Path>) -> Result<C> {
    let Some(path) = path else { return Ok(C::default()) };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

/// One `c · t^a x^b` term of an inline right-hand side.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub coef: f64,
    pub t_pow: i32,
    pub x_pow: i32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateConfig {
    /// Built-in right-hand side; ignored when `terms` is given.
    pub equation: String,
    pub terms: Option<Vec<Term>>,
    pub t0: f64,
    pub t1: f64,
    /// `x(t0)` of each trajectory.
    pub initial: Vec<f64>,
    pub points: usize,
    pub substeps: usize,
    /// Relative noise level.
    pub sigma: f64,
    pub seed: u64,
    pub output: String,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        Self {
            equation: "riccati".into(),
            terms: None,
            t0: 1.0,
            t1: 2.0,
            initial: vec![0.15, 0.4, 1.0, 2.0, 4.0],
            points: 400,
            substeps: 4,
            sigma: 0.0,
            seed: 0,
            output: "trajectories.csv".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadoutSource {
    /// Constrain the search to evolution-aligned generators.
    #[default]
    Evolution,
    /// Read the ratio off the detected generator.
    Detected,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscoverConfig {
    pub input: String,
    pub derivative: DerivativeMethod,
    pub normals: NormalConfig,
    pub detect: DetectConfig,
    pub readout: bool,
    pub readout_source: ReadoutSource,
    /// Points per axis of the readout grid.
    pub grid: usize,
    pub seed: u64,
}

impl Default for DiscoverConfig {
    fn default() -> Self {
        Self {
            input: "trajectories.csv".into(),
            derivative: DerivativeMethod::Central,
            normals: NormalConfig::default(),
            detect: DetectConfig::default(),
            readout: false,
            readout_source: ReadoutSource::default(),
            grid: 20,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompleteConfig {
    pub input: String,
    pub rank: usize,
    pub fraction: f64,
    pub denoise: DenoiseConfig,
    pub seed: u64,
}

impl Default for CompleteConfig {
    fn default() -> Self {
        Self { input: "image.pgm".into(), rank: 3, fraction: 0.5, denoise: DenoiseConfig::default(), seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DenoiseCmdConfig {
    /// Headerless numeric CSV, one matrix row per line.
    pub input: String,
    pub denoise: DenoiseConfig,
    pub seed: u64,
}

impl Default for DenoiseCmdConfig {
    fn default() -> Self {
        Self { input: "matrix.csv".into(), denoise: DenoiseConfig::default(), seed: 0 }
    }
}
