//! Determining-equation assembly, rank-revealing basis growth and generator readout.

mod detect;
mod readout;
mod system;

pub use detect::{
    alignment_score, detect, rank_deficiency_test, rank_test_matrix, Alignment, DegreeReport, DetectConfig, RankTest, SymmetryResult,
};
pub use readout::{evolution_generator, linspace, model_readout, Grid, Readout};
pub use system::{assemble, row_for_sample, DeterminingSystem, ROWS_PER_COLUMN_MIN};
