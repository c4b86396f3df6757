use thiserror::Error;

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Some configuration diverged in every repeat, or a run failed at runtime.
pub const EXIT_RUNTIME: i32 = 1;
/// The invocation or config was invalid; nothing was run.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("diverged in every repeat: {}", .0.join(", "))]
    Diverged(Vec<String>),

    #[error(transparent)]
    Core(#[from] adanorm_core::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use adanorm_core::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(
                E::InvalidArgument(_) | E::InvalidHyperParam { .. } | E::UnknownOptimizer(_),
            ) => EXIT_USAGE,
            _ => EXIT_RUNTIME,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
