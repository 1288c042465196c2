use std::fmt;

/// One invalid setting, addressed by its dotted path in the config document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl FieldError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        FieldError {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", list(.0))]
    Config(Vec<FieldError>),
    #[error("{0}")]
    Capability(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("{0}")]
    Core(qpar::Error),
}

fn list(errors: &[FieldError]) -> String {
    errors
        .iter()
        .map(|e| format!("  - {e}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl CliError {
    pub fn config(path: &str, message: impl Into<String>) -> Self {
        CliError::Config(vec![FieldError::new(path, message)])
    }

    /// Process exit status: 2 config, 3 capability, 4 I/O, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Capability(_) => 3,
            CliError::Io(_) => 4,
            CliError::Core(_) => 1,
        }
    }
}

impl From<qpar::Error> for CliError {
    fn from(e: qpar::Error) -> Self {
        match e {
            qpar::Error::Capability(msg) => CliError::Capability(msg),
            qpar::Error::Io(msg) => CliError::Io(msg),
            qpar::Error::Config(msg) => CliError::config("config", msg),
            qpar::Error::Parse { line, message } => {
                CliError::config("system.edge_file", format!("line {line}: {message}"))
            }
            other => CliError::Core(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
