use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("invalid modulus: {0}")]
    InvalidModulus(String),

    #[error("modulus is not admissible (d_w = {d_w})")]
    NotAdmissible { d_w: f64 },

    #[error("metric space must contain at least two distinct points")]
    Nontrivial,

    #[error("input too large: {what} has {got} elements, limit {limit}")]
    Size { what: &'static str, got: usize, limit: usize },

    #[error("dimension fit failed: {0}")]
    Fit(String),

    #[error("covering bound violated at level {level}: greedy cover has {count} balls, bound c*3^d*2^(dn) = {bound}")]
    DimsTooSmall { level: usize, count: usize, bound: f64 },

    #[error("point {0} is not a net point")]
    NotNetPoint(usize),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("quadrature did not converge: {0}")]
    Accuracy(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
