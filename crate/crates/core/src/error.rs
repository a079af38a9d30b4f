use crate::solver::SimState;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid grid, parameter or configuration input.
    #[error("configuration error: {0}")]
    Config(String),

    /// Out-of-range block index, exponent or similar argument.
    #[error("range error: {0}")]
    Range(String),

    /// Time step rejected (CFL violation or too-large horizon).
    #[error("step-size error: {0}")]
    StepSize(String),

    /// The integration produced NaN/Inf or runaway amplitudes. Carries the
    /// last valid state so lifespan experiments can record the failure time.
    #[error("blow-up detected at t = {t}")]
    BlowUp { t: f64, state: Box<SimState> },

    /// Picard iterates diverged at the requested horizon.
    #[error("picard horizon too large: {0}")]
    HorizonTooLarge(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file {path}: {reason}")]
    Format { path: String, reason: String },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
