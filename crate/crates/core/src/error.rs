use thiserror::Error;

/// Errors produced by the rotor, spectral and statistics routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error(
        "kick amplitude overflow: K*lambda/(sqrt(1+lambda^2)*hbar_eff) = {exponent:.3} exceeds {limit}"
    )]
    KickOverflow { exponent: f64, limit: f64 },

    #[error("{backend} eigensolver failed to converge{}", .index.map(|i| format!(" at eigenvalue index {i}")).unwrap_or_default())]
    EigenNonConvergence {
        backend: &'static str,
        index: Option<usize>,
    },

    #[error("zero Floquet eigenvalue at index {index}; the operator is numerically singular")]
    ZeroEigenvalue { index: usize },

    #[error(
        "degenerate spectrum: points {first} and {second} coincide (distance {distance:e}); \
         enable mass jitter to lift degeneracies"
    )]
    DegenerateSpectrum {
        first: usize,
        second: usize,
        distance: f64,
    },

    #[error("not enough points: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("state norm overflow at step {step}")]
    NormOverflow { step: usize },

    #[error("no exponential regime: fit window has {points} points, need at least 3")]
    NoExponentialRegime { points: usize },

    #[error("corrupt checkpoint at line {line}: {reason}")]
    CorruptCheckpoint { line: usize, reason: String },

    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("malformed input at row {row}: {reason}")]
    Parse { row: usize, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
