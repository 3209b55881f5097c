//! Error type shared by every module, plus the CLI exit-code mapping.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} lies outside the chart (r = {r}, R = {radius})")]
    Domain { point: [f64; 3], r: f64, radius: f64 },

    #[error("degenerate embedding at uv = {uv:?}: tangent frame has rank < 2")]
    DegenerateEmbedding { uv: [f64; 2] },

    #[error("metric is not positive definite at {point:?}")]
    MetricNotSpd { point: [f64; 3] },

    #[error("boundary curve is not transverse: g(X, γ') vanishes or changes sign near t = {t}")]
    NotTransverse { t: f64 },

    #[error("field vanishes at {point:?} (|X| = {norm:e})")]
    VanishingField { point: [f64; 3], norm: f64 },

    #[error("finite-difference step {step:e} underflowed near the chart boundary at {point:?}")]
    ShrinkStep { point: [f64; 3], step: f64 },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("field is not tangent to the boundary torus: max |X·e_r|/|X| = {max_radial:e}")]
    NotInvariant { max_radial: f64 },

    #[error("Newton refinement did not converge in cell centred at {cell:?} (residual {residual:e})")]
    DegenerateSingularity { cell: [f64; 2], residual: f64 },

    #[error("projected field is not generic: {0}; bump the disc or perturb the field")]
    NonGenericField(String),

    #[error("winding circle radius {radius:e} at {center:?} is unusable: {reason}")]
    Radius {
        center: [f64; 2],
        radius: f64,
        reason: String,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("X(p) is tangent to the disc at a projected rest point {uv:?} (|g(X,n)| = {normal:e})")]
    SigmaContradiction { uv: [f64; 2], normal: f64 },

    #[error("push-off oracle unavailable: {0}")]
    OracleUnavailable(String),

    #[error("flowline integration stalled at t = {t} (step {step:e})")]
    Stiffness { t: f64, step: f64 },

    #[error("synthetic field specification rejected: {0}")]
    SpecCollision(String),

    #[error("boundary foliation could not be classified: {0}")]
    BoundaryUnresolved(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::Data(_)
            | Error::SpecCollision(_)
            | Error::Domain { .. } => 2,
            Error::NotInvariant { .. } => 3,
            Error::NonGenericField(_) => 5,
            _ => 6,
        }
    }
}
