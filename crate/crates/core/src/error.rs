use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("vertices are not in strictly convex position")]
    NotConvex,
    #[error("the origin is not an interior point of the body")]
    OriginNotInterior,
    #[error("invalid p-ball: {0}")]
    InvalidPBall(String),
    #[error("trig table resolution {got} is below the minimum {min}")]
    ResolutionTooLow { got: usize, min: usize },
    #[error("point has non-positive y = {0}")]
    NonpositiveY(f64),
    #[error("curve is not closed (endpoint gap {0:e})")]
    NotClosed(f64),
    #[error("curve is not simple: segments {0} and {1} intersect")]
    NotSimple(usize, usize),
    #[error("enclosed area is not positive ({0:e})")]
    NonpositiveArea(f64),
    #[error("lambda = {lambda} is outside the admissible domain (bound {bound})")]
    LambdaOutOfDomain { lambda: f64, bound: f64 },
    #[error("ODE step too coarse: angle closure error {error:e} exceeds {tolerance:e}")]
    StepTooCoarse { error: f64, tolerance: f64 },
    #[error("{what} did not converge")]
    NoConvergence { what: &'static str },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("body spec error at {path}: {message}")]
    Spec { path: String, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
