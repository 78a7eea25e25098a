use thiserror::Error;

/// Failures of the driver, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("output error: {0}")]
    Output(String),

    #[error("numerical failure in {module}::{op}: {source}")]
    Numerical {
        module: &'static str,
        op: &'static str,
        source: matvar::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Output(_) => 2,
            CliError::Numerical { .. } => 3,
        }
    }
}

/// Tags a core error with the module and operation that raised it.
pub fn num(module: &'static str, op: &'static str) -> impl Fn(matvar::Error) -> CliError {
    move |source| CliError::Numerical { module, op, source }
}
