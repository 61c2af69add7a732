use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error(
        "triangle inequality violated on ({i}, {j}, {k}): d({i},{k}) = {direct} > d({i},{j}) + d({j},{k}) = {detour}"
    )]
    Triangle {
        i: usize,
        j: usize,
        k: usize,
        direct: f64,
        detour: f64,
    },

    #[error("{what}: size {size} exceeds the capacity {cap}")]
    Capacity {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("invalid admissible sequence: {0}")]
    InvalidSequence(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("constant `{0}` has no literature value; supply a fitted override (--fit with {{\"{0}\": ...}})")]
    MissingConstant(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
