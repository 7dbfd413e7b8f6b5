use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid device: {0}")]
    InvalidDevice(String),
    #[error("mesh would need {required} nodes, limit is {limit}")]
    Resource { required: usize, limit: usize },
    #[error("assembly failed: {0}")]
    Assembly(String),
    #[error("linear solve failed: {0}")]
    LinearSolve(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("field is not converged (relative residual {residual:.3e})")]
    NotConverged { residual: f64 },
    #[error(
        "no sign change in bracket [{lo}, {hi}] V (f(lo) = {f_lo:.4} meV, f(hi) = {f_hi:.4} meV)"
    )]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("fit failed: {0}")]
    Fit(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),
}

impl Error {
    /// Process exit status for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::InvalidDevice(_)
            | Error::TomlDe(_)
            | Error::Resource { .. } => 2,
            Error::NotConverged { .. } => 3,
            Error::Bracket { .. } => 4,
            _ => 1,
        }
    }
}
