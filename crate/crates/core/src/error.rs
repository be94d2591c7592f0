use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid paging scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mean system time difference does not change sign on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("scheme `{scheme}` saturates inside the bracket at arrival rate {lambda} before the curves cross")]
    Unstable { scheme: String, lambda: f64 },

    #[error("linear system is singular (pivot {pivot:e})")]
    Singular { pivot: f64 },

    #[error("invalid absorbing chain: {0}")]
    InvalidChain(String),

    #[error("unsupported paging scenario: {0}")]
    UnsupportedScenario(String),

    #[error("invalid traffic spec: {0}")]
    InvalidSpec(String),

    #[error("series too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("insufficient training data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("actual series has zero energy; normalized metrics are undefined")]
    ZeroEnergy,

    #[error("degenerate horizon: only {arrivals} post-warmup arrivals (need at least {required})")]
    DegenerateHorizon { arrivals: u64, required: u64 },

    #[error("insufficient history: forecaster needs {needed} samples, series has {got}")]
    InsufficientHistory { needed: usize, got: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
