use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("no witness found at level {level} for denominators in [{t_lo}, {t_hi}]")]
    WitnessNotFound { level: usize, t_lo: String, t_hi: String },

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("search cutoff {cutoff} exceeded: {what}")]
    Cutoff { what: String, cutoff: String },

    #[error("verification failed: {0}")]
    Verification(String),
}
