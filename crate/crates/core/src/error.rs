use std::path::PathBuf;

/// Errors raised by the numerical pipeline and its I/O layer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension d = {d} is not supported (need d >= 3)")]
    InvalidDimension { d: u32 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("no negative eigenvalue of the composed operator (smallest {smallest:.3e})")]
    NoNegativeEigenvalue { smallest: f64 },

    #[error("order-{j} profile system is near-singular (condition estimate {condition:.3e})")]
    NearSingular { j: usize, condition: f64 },

    #[error("missing lower-order profiles: order {j} needs {needed}, got {got}")]
    MissingProfiles { j: usize, needed: usize, got: usize },

    #[error("scaling mu = {mu:.3e} moves the profile out of the truncated domain")]
    ScaleOutOfDomain { mu: f64 },

    #[error("fit window is empty: {0}")]
    EmptyWindow(String),

    #[error("modulation bracket failed; distance profile {profile:?}")]
    BracketFailure { profile: Vec<(f64, f64)> },

    #[error("singular matrix at pivot {0}")]
    Singular(usize),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("malformed file {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}
