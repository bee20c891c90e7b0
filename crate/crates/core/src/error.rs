use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("spectrum is not Hermitian (imaginary residual {residual:e})")]
    SymmetryViolation { residual: f64 },

    #[error("operator requires a mean-zero field (mean coefficient {mean:e})")]
    NonzeroMean { mean: f64 },

    #[error("negative power of Lambda applied to a field with nonzero mean ({mean:e})")]
    NegativePowerOnNonzeroMean { mean: f64 },

    #[error("invalid Lebesgue exponent p = {0}")]
    InvalidExponent(f64),

    #[error("band index {j} outside resolved range [{min}, {max}]")]
    BandOutOfRange { j: i32, min: i32, max: i32 },

    #[error("grid too small: only {bands} dyadic bands resolved (need at least 3)")]
    GridTooSmall { bands: usize },

    #[error("invalid Besov descriptor: {0}")]
    InvalidBesov(String),

    #[error("invalid smoothness s = {s} for {lemma}")]
    InvalidSmoothness { s: f64, lemma: &'static str },

    #[error("blow-up suspected at t = {t}: {reason}")]
    BlowupSuspected { t: f64, reason: String },

    #[error("time {t} outside frozen-velocity range [{start}, {end}]")]
    InterpolationOutOfRange { t: f64, start: f64, end: f64 },

    #[error("inadmissible Strichartz pair (gamma = {gamma}, r = {r})")]
    Inadmissible { gamma: f64, r: f64 },

    #[error("gamma = {gamma} exceeds q = {q}")]
    GammaExceedsQ { gamma: f64, q: f64 },

    #[error("insufficient quadrature nodes: kappa * dt = {kappa_dt} exceeds {limit}")]
    InsufficientNodes { kappa_dt: f64, limit: f64 },

    #[error("snapshot spacing too coarse: kappa * dt_snap = {kappa_dt} exceeds 1/2")]
    SnapshotsTooCoarse { kappa_dt: f64 },

    #[error("empty diagnostic series")]
    EmptySeries,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
