//! Sparse and low-rank recovery: soft thresholding, Landweber/ISTA, Bregman
//! add-back, singular value thresholding and projection-based rank denoising.

mod config;
mod denoise;
mod iterative;
mod operator;
mod shrink;

pub use config::DenoiseConfig;
pub use denoise::{default_projections, matrix_denoise, nuclear_bregman, DenoiseOutcome};
pub use iterative::{bregman_solve, ista_solve, landweber_step, BregmanOutcome, SolveOutcome};
pub use operator::MeasurementOperator;
pub use shrink::{map_shrinkage, soft_threshold, svt};
