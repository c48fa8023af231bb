use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    /// 2 for configuration problems, 3 for I/O failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<guiltevo_core::Error> for CliError {
    fn from(err: guiltevo_core::Error) -> Self {
        match err {
            guiltevo_core::Error::Io(e) => CliError::Io(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub(crate) fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub(crate) fn io_err(path: &std::path::Path, err: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {err}", path.display()))
}
