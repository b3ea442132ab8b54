use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value at node {node}")]
    NonFinite { node: usize },

    #[error("body is not strictly convex: margin {margin:e} below threshold {threshold:e}")]
    NotConvex { margin: f64, threshold: f64 },

    #[error("could not produce a strictly convex body after {attempts} attempts")]
    ConvexityUnattainable { attempts: usize },

    #[error("support function must be positive (min {min:e}); recentre the body first")]
    NonPositiveSupport { min: f64 },

    #[error("Gauss curvature is not positive at node {node}")]
    NonPositiveCurvature { node: usize },

    #[error("step size underflow at t = {t}: dt {dt:e} below minimum")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("invalid body file: {0}")]
    BodyFile(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
