use thiserror::Error;

/// Errors raised across the estimation, design and detection pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("component {component} has {available} states, {required} needed for the requested redundancy")]
    InsufficientComponentSize {
        component: String,
        available: usize,
        required: usize,
    },

    #[error("cannot survive {q} removals with only {n} sensors (need at least {})", q + 1)]
    InfeasibleConnectivity { n: usize, q: usize },

    #[error("the pair (W (x) A, D_C) is not observable")]
    NotObservable,

    #[error("gain synthesis failed: {0}")]
    SynthesisFailed(String),

    #[error("{0} did not converge within the iteration cap")]
    NonConvergence(&'static str),

    #[error("argument outside domain: {0}")]
    DomainError(String),

    #[error("error dynamics bound is unavailable: spectral norm b = {b} >= 1")]
    UnstableError { b: f64 },

    #[error("removing the requested sensors would leave an empty network")]
    EmptyNetwork,

    #[error("empty residual window")]
    EmptyWindow,

    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn dims(message: impl Into<String>) -> Self {
        Error::DimensionMismatch(message.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
