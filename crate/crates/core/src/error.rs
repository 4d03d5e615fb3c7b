use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("ground set of size {n} exceeds the limit of {limit} for {what}")]
    TooLarge { what: &'static str, n: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point is not in the polytope")]
    Infeasible,

    #[error("unsupported polytope kind for {0}")]
    UnsupportedPolytope(&'static str),

    #[error("numerical invariant violated: {0}")]
    Numerical(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
