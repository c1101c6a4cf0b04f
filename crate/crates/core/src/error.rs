use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HocfError {
    #[error("coefficient `{field}` must be strictly positive, found {value} at z = {z}")]
    PositivityViolation {
        field: &'static str,
        z: f64,
        value: f64,
    },

    #[error("parameter `{0}` must be nonzero")]
    ZeroParameter(&'static str),

    #[error("malformed grid: {0}")]
    GridError(String),

    #[error("argument {value} outside domain {domain}")]
    DomainError { value: f64, domain: &'static str },

    #[error("pair (F, c0) is not observable (observability matrix is singular)")]
    NotObservable,

    #[error("resolution too small: {0}")]
    ResolutionError(String),

    #[error("output window covers {got} but {expected} is required")]
    WindowMismatch { expected: f64, got: f64 },

    #[error(
        "kernel iteration did not converge after {iterations} sweeps (last change {last_change:e})"
    )]
    NoConvergence { iterations: usize, last_change: f64 },

    #[error("trace covers [{have_start}, {have_end}] but [{need_start}, {need_end}] is needed")]
    InsufficientTrace {
        need_start: f64,
        need_end: f64,
        have_start: f64,
        have_end: f64,
    },

    #[error("kernel table anchored at z0 = {z0} does not reach z = {z}")]
    KernelDomainError { z0: f64, z: f64 },

    #[error("signal window of length {got} is shorter than the required {needed}")]
    WindowTooShort { needed: f64, got: f64 },

    #[error("grid with {points} points is too coarse (need at least {required})")]
    GridTooCoarse { points: usize, required: usize },

    #[error("Volterra march hit a vanishing pivot at tau = {tau}")]
    SingularMarch { tau: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T> = std::result::Result<T, HocfError>;
