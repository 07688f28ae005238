use thiserror::Error;

/// Errors raised by the engine, the diagnostics and the harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// An inverse transform was asked to produce a real field from coefficients
    /// that are not Hermitian-symmetric.
    #[error("spectral field is not Hermitian-symmetric (relative defect {defect:e})")]
    NonHermitian { defect: f64 },

    /// A multiplier symbol would exceed the representable range on a mode that
    /// carries energy. For `GammaInverse` this means the Gevrey radius is used up.
    #[error("amplification overflow at mode {mode:?}: log-symbol {log_symbol} exceeds cap {cap}")]
    AmplificationOverflow {
        mode: [i64; 2],
        log_symbol: f64,
        cap: f64,
    },

    #[error("blow-up detected: non-finite state after t = {last_valid_time}")]
    BlowupDetected { last_valid_time: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("malformed query: {0}")]
    MalformedQuery(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
