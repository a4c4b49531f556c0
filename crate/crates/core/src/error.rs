use thiserror::Error;

/// Errors raised anywhere in the engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("wavelength {wavelength_nm:.4} nm outside valid range [{min_nm:.1}, {max_nm:.1}] nm")]
    OutOfRange {
        wavelength_nm: f64,
        min_nm: f64,
        max_nm: f64,
    },
    #[error("energy conservation violated: 1/λp - 1/λs - 1/λi = {relative_residual:e} (relative)")]
    EnergyMismatch { relative_residual: f64 },
    #[error("no poling period root: {0}")]
    NoRoot(String),
    #[error("index out of range: {0}")]
    IndexError(String),
    #[error("series failed to converge: {0}")]
    NoConvergence(String),
    #[error("detuning {omega:e} rad/s exceeds the small-detuning limit {limit:e} rad/s")]
    DetuningOutOfRange { omega: f64, limit: f64 },
    #[error("quadrature budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("grid too narrow: outer samples carry {tail_fraction:e} of the total (limit {limit:e})")]
    GridTooNarrow { tail_fraction: f64, limit: f64 },
    #[error("spectra are sampled on different grids")]
    GridMismatch,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("degenerate subspace: ℓ = ℓ̃ = {0}")]
    DegenerateSubspace(i32),
    #[error("P_{ell} never reaches the reference level {reference:e} on the requested waist range")]
    NoCrossing { ell: i32, reference: f64 },
    #[error("empty matrix")]
    EmptyMatrix,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("config error at {location}: {message}")]
    Config { location: String, message: String },
    #[error("counts file row {row}: {message}")]
    CountsFile { row: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
