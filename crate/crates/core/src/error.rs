use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("pole: monomial t^{a} x^{b} undefined at t={t}, x={x}")]
    Pole { a: i32, b: i32, t: f64, x: f64 },
    #[error("duplicate time {t} in trajectory {id}")]
    DuplicateTime { id: String, t: f64 },
    #[error("too few usable rows: need at least {required}, have {available}")]
    TooFewRows { required: usize, available: usize },
    #[error("rank {r} out of range 1..={max}")]
    RankOutOfRange { r: usize, max: usize },
    #[error("readout refused: alignment {alignment:.4} below threshold {threshold}; generator is not evolution-aligned")]
    ReadoutRefused { alignment: f64, threshold: f64 },
    #[error("pgm: {0}")]
    Pgm(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
