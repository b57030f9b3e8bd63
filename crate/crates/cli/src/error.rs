use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numeric failure: {0}")]
    Numeric(#[from] nlamp_core::Error),

    #[error("{0}")]
    ZeroProbability(String),

    #[error("optimizer did not converge at {0} of the requested thresholds")]
    NotConverged(usize),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::ZeroProbability(_) => 3,
            CliError::NotConverged(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}
