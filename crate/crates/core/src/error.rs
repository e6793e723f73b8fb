use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("degenerate projection: residual norm {0:e} below 1e-10")]
    DegenerateProjection(f64),
    #[error("degenerate mode: E = 0 at p = 0, m = 0")]
    DegenerateMode,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("scenario error: {0}")]
    Scenario(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("feasibility error: {0}")]
    Feasibility(String),
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
