use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Rejected configuration; the message starts with `file:line`.
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] holocurve::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for anything the user can fix in the input, 3 when a numerical
    /// procedure gave up, 1 for the environment.
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Core(e) if e.is_numerical() => ExitCode::from(3),
            CliError::Core(_) => ExitCode::from(2),
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => ExitCode::from(1),
        }
    }
}
