use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] ulc_core::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use ulc_core::Error as E;
        match self {
            Self::Core(E::Verification(_) | E::Inconclusive(_) | E::WitnessNotFound { .. } | E::Cutoff { .. }) => EXIT_VERIFY,
            _ => EXIT_USAGE,
        }
    }
}
