use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown distribution family `{0}`")]
    UnknownFamily(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("malformed family spec `{spec}`: {reason}")]
    FamilySpec { spec: String, reason: String },

    #[error("integer overflow computing falling factorial {n}^({t})")]
    Overflow { n: u64, t: u32 },

    #[error("parameter regime violated: {0}")]
    Regime(String),

    #[error("polynomial degree {0} exceeds the supported maximum of 40")]
    DegreeTooLarge(usize),

    #[error("x = {x} lies outside the polynomial's interval [{lo}, {hi}]")]
    OutsideInterval { x: f64, lo: f64, hi: f64 },

    #[error("function is not 1-Lipschitz with f(0) = 0: {0}")]
    NotLipschitz(String),

    #[error("estimator `{estimator}` does not support property `{property}`")]
    Incompatible { estimator: String, property: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {reason}")]
    Parse { path: PathBuf, reason: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
