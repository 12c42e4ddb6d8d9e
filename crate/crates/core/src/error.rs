use thiserror::Error;

/// Errors raised by the simulation and verification layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("simulation blow-up at t = {t} s: {reason}")]
    BlowUp { t: f64, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("trace error: {0}")]
    Trace(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
