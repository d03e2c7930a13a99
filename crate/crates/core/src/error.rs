use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The behaviour policy assigns zero probability to an action that was
    /// (or could be) taken, so the importance ratio is undefined.
    #[error("behaviour policy has no support on action {action} (state {state:?})")]
    InvalidSupport { state: Option<usize>, action: usize },

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(
        "policy evaluation did not converge after {sweeps} sweeps (last change {last_change:e})"
    )]
    NonConvergence { sweeps: usize, last_change: f64 },

    #[error("enumeration exceeds {cap} branches")]
    TooManyBranches { cap: usize },

    #[error("non-finite update target {0}")]
    NonFinite(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("{path}: {source}")]
    ConfigParse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}
