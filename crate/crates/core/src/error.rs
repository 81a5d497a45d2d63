use std::path::PathBuf;

/// Errors raised anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid range: lo={lo} > hi={hi}")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    /// A NaN or infinity appeared. `index` locates it (layer, step or
    /// component depending on `context`).
    #[error("non-finite value in {context} at index {index}")]
    NonFinite { context: &'static str, index: usize },

    #[error("invalid hyperparameter {name}={value}: {reason}")]
    InvalidHyperParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("averaging weight {delta} at step {step} is outside [0, 1)")]
    ScheduleDomain { step: u64, delta: f64 },

    #[error("channel selection failed: {0}")]
    Selection(&'static str),

    #[error("reference values have zero energy; relative error undefined")]
    DegenerateReference,

    #[error("usage error: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn shape(context: &'static str, expected: usize, actual: usize) -> Self {
        Error::Shape {
            context,
            expected,
            actual,
        }
    }
}

/// Returns the first index whose value is not finite.
pub(crate) fn first_non_finite(values: &[f64]) -> Option<usize> {
    values.iter().position(|v| !v.is_finite())
}
