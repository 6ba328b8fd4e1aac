use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("no unique equilibrium: {0}")]
    Singular(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("simulation error at t={t:.6}: {msg}")]
    Simulation { t: f64, msg: String },
    #[error("insufficient span: need {need:.6}, have {have:.6}")]
    InsufficientSpan { need: f64, have: f64 },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
