//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "block shape mismatch at (k={k}, n={n}, m={m}): got {rows}x{cols}, expected {want_rows}x{want_cols}"
    )]
    ShapeMismatch {
        k: i64,
        n: usize,
        m: usize,
        rows: usize,
        cols: usize,
        want_rows: usize,
        want_cols: usize,
    },

    #[error("operands live on different omega grids")]
    GridMismatch,

    #[error("operands are built over different spectra")]
    SpectrumMismatch,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(
        "resonant divisor at stage {stage}, index (k={k}, n={n}, m={m}): spectral distance {dist:.6e} < {threshold:.6e}"
    )]
    Resonance {
        stage: usize,
        k: i64,
        n: usize,
        m: usize,
        dist: f64,
        threshold: f64,
    },

    #[error("divergent constant: {0}")]
    Divergence(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("tolerance failure: {0}")]
    Tolerance(String),
}

pub type Result<T> = std::result::Result<T, Error>;
