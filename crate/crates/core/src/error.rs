use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point is not in the domain")]
    OutsideDomain,

    #[error("direction vector is zero")]
    ZeroDirection,

    #[error("no boundary crossing found along a ray and the domain declares no finite bounding radius")]
    Unbounded,

    #[error("{what} did not converge (error estimate {estimate:e})")]
    NonConvergence { what: &'static str, estimate: f64 },

    #[error("non-smooth boundary point: {0}")]
    NonSmooth(String),

    #[error("operation requires a convex domain")]
    NotConvex,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("chart inconsistency: {0}")]
    ChartInconsistency(String),

    #[error("point lies outside the chart box")]
    OutOfChart,

    #[error("empty fiber")]
    EmptyFiber,

    #[error("not log-type convex at sampled resolution")]
    NotLogTypeConvex,

    #[error("no admissible epsilon above the grid minimum {0:e}")]
    NoAdmissibleEpsilon(f64),

    #[error("samples cover {found} dyadic distance bands, at least {needed} required")]
    TooFewBands { found: usize, needed: usize },

    #[error("tail bound {tail:e} did not fall below {tol:e} within {levels} levels")]
    TailNotReached { tail: f64, tol: f64, levels: usize },

    #[error("image sequence leaves every bounded region")]
    DivergentImage,
}

pub type Result<T> = std::result::Result<T, Error>;
