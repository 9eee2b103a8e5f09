pub mod basis;
pub mod completion;
pub mod error;
pub mod jetspace;
pub mod linalg;
pub mod rng;
pub mod scalar;
pub mod sparseopt;
pub mod symmetry;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// `f64` instantiations of the generic types.
pub type Matrix = linalg::DenseMatrix<f64>;
pub type Trajectory = jetspace::Trajectory<f64>;
pub type JetSample = jetspace::JetSample<f64>;
pub type DenoiseConfig = sparseopt::DenoiseConfig<f64>;
pub type DetectConfig = symmetry::DetectConfig<f64>;
pub type SymmetryResult = symmetry::SymmetryResult<f64>;
pub type RhsSpec = synth::RhsSpec<f64>;
pub type GrayImage = completion::GrayImage<f64>;

/// Single-precision instantiations.
pub mod single {
    pub type Matrix = crate::linalg::DenseMatrix<f32>;
    pub type Trajectory = crate::jetspace::Trajectory<f32>;
    pub type DenoiseConfig = crate::sparseopt::DenoiseConfig<f32>;
    pub type GrayImage = crate::completion::GrayImage<f32>;
}
