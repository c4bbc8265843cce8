use thiserror::Error;

/// Failure of one CLI stage. Every message starts with the stage name.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: adscan::Error,
    },
    #[error("{stage}: {message}")]
    Usage { stage: String, message: String },
    /// An invariant the pipeline guarantees did not hold.
    #[error("{stage}: internal error: {message}")]
    Internal { stage: String, message: String },
}

impl CliError {
    pub fn stage(stage: &str, source: adscan::Error) -> Self {
        CliError::Stage {
            stage: stage.into(),
            source,
        }
    }

    pub fn usage(stage: &str, message: impl Into<String>) -> Self {
        CliError::Usage {
            stage: stage.into(),
            message: message.into(),
        }
    }

    pub fn internal(stage: &str, message: impl Into<String>) -> Self {
        CliError::Internal {
            stage: stage.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Stage { .. } | CliError::Usage { .. } => 1,
            CliError::Internal { .. } => 2,
        }
    }
}
