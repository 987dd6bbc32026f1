use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Domain(String),

    #[error("site index {index} out of range for N = {n}")]
    Index { index: usize, n: usize },

    #[error("time {requested} exceeds stream horizon {horizon}")]
    HorizonExceeded { requested: f64, horizon: f64 },

    #[error("window [{t0}, {t1}] not inside [0, {horizon}]")]
    Window { t0: f64, t1: f64, horizon: f64 },

    #[error("time step {dt} violates stability bound {bound}")]
    Stability { dt: f64, bound: f64 },

    #[error("malformed tree: {0}")]
    MalformedTree(String),

    #[error("tree sampling overflowed in {rate:.4} of samples")]
    Overflow { rate: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
