use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or parameters; nothing was computed. Exit 2.
    Usage(String),
    /// A numerical stage failed or returned a negative verdict. Exit 1.
    Stage { stage: String, detail: String },
}

impl CliError {
    pub fn stage(stage: &str, detail: impl fmt::Display) -> Self {
        CliError::Stage {
            stage: stage.to_string(),
            detail: detail.to_string(),
        }
    }

    pub fn usage(detail: impl fmt::Display) -> Self {
        CliError::Usage(detail.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Stage { .. } => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Stage { stage, detail } => write!(f, "stage `{stage}` failed: {detail}"),
        }
    }
}

/// Tags a numerical error with the stage that raised it.
pub trait AtStage<T> {
    fn at(self, stage: &str) -> Result<T, CliError>;
}

impl<T, E: fmt::Display> AtStage<T> for Result<T, E> {
    fn at(self, stage: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::stage(stage, e))
    }
}

/// Validation counterpart of [`AtStage`]: errors become usage errors.
pub trait Invalid<T> {
    fn invalid(self, what: &str) -> Result<T, CliError>;
}

impl<T, E: fmt::Display> Invalid<T> for Result<T, E> {
    fn invalid(self, what: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::Usage(format!("{what}: {e}")))
    }
}
