use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("malformed report: {0}")]
    Report(String),
    #[error(transparent)]
    Core(#[from] rcm_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
