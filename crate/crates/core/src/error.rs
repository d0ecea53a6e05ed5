use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain length on axis {axis} must be positive, got {value}")]
    NonPositiveLength { axis: usize, value: f64 },
    #[error("resolution on axis {axis} must be even and at least 8, got {value}")]
    ResolutionTooSmall { axis: usize, value: usize },
    #[error("unsupported dimension {0}; expected 1, 2 or 3")]
    UnsupportedDimension(usize),
    #[error("grid shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("fields live on different domains")]
    DomainMismatch,
    #[error("parity mismatch: {0}")]
    ParityMismatch(String),
    #[error("invalid exponent {0}; need p >= 1 or p = infinity")]
    InvalidExponent(f64),
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("exponent ordering violated for estimate ({kind}): p = {p}, q = {q}")]
    ExponentOrderViolation { kind: String, p: f64, q: f64 },
    #[error("field is not mean-zero (mean = {0:e})")]
    MeanNotZero(f64),
    #[error("signal window too short: need {needed}, have {have}")]
    WindowTooShort { needed: f64, have: f64 },
    #[error("argument {0} outside (0, 1/2]")]
    OutOfRange(f64),
    #[error("missing estimate report for kind {0}")]
    MissingReport(String),
    #[error("exponent regime violated: need p > max(3, n) with n = {n}, got p = {p}")]
    ExponentRegimeViolation { p: f64, n: usize },
    #[error("time grids do not match")]
    GridMismatch,
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("smallness condition violated: {0}")]
    SmallnessViolated(String),
    #[error("a priori bound violated: {0}")]
    BoundViolated(String),
    #[error("Picard iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("distance series is identically zero")]
    DegenerateDistance,
    #[error("rate ordering violated: need 0 < sigma < lambda1, got sigma = {sigma}, lambda1 = {lambda1}")]
    RateOrderViolation { sigma: f64, lambda1: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("config parse error at `{key}`: {message}")]
    ConfigParse { key: String, message: String },
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
