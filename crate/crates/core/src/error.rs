use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: String, right: String },

    #[error("non-finite value at ({row}, {col}) in {what}")]
    NonFinite {
        what: &'static str,
        row: usize,
        col: usize,
    },

    #[error("grid {rows}x{cols} is smaller than the {patch_h}x{patch_w} patch")]
    PatchTooLarge {
        rows: usize,
        cols: usize,
        patch_h: usize,
        patch_w: usize,
    },

    #[error("grid must be at least {min_rows}x{min_cols}, got {rows}x{cols}")]
    GridTooSmall {
        rows: usize,
        cols: usize,
        min_rows: usize,
        min_cols: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("signal is identically zero; SNR is undefined")]
    ZeroSignal,

    #[error("photometric stereo needs at least 3 lights, got {0}")]
    TooFewLights(usize),

    #[error("lighting directions are rank deficient (condition number {cond:.3e})")]
    RankDeficientLighting { cond: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim_mismatch(left: (usize, usize), right: (usize, usize)) -> Self {
        Error::DimMismatch {
            left: format!("{}x{}", left.0, left.1),
            right: format!("{}x{}", right.0, right.1),
        }
    }
}
