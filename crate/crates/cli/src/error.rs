use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Config { line: Option<usize>, message: String },
    #[error("numerical contract failed [{invariant}]: {detail}")]
    Contract { invariant: String, detail: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Contract { .. } => 3,
            CliError::Io(_) => 1,
        }
    }

    pub fn contract(invariant: &str, detail: impl Into<String>) -> Self {
        CliError::Contract { invariant: invariant.into(), detail: detail.into() }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
