use serde_json::json;

/// Failure of a CLI run. Parse and validation problems exit with status 1,
/// everything else with status 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        message: String,
        line: usize,
        column: usize,
    },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation(_) => 1,
            CliError::Runtime(_) | CliError::Io(_) => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "parse",
            CliError::Validation(_) => "validation",
            CliError::Runtime(_) => "runtime",
            CliError::Io(_) => "io",
        }
    }

    /// One-line JSON record for stderr.
    pub fn to_record(&self) -> String {
        let mut record = json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        if let CliError::Parse { line, column, .. } = self {
            record["line"] = json!(line);
            record["column"] = json!(column);
        }
        record.to_string()
    }
}

impl From<pmde_core::Error> for CliError {
    fn from(e: pmde_core::Error) -> Self {
        use pmde_core::Error as E;
        match e {
            E::InvalidConfig(_) | E::ArityMismatch { .. } | E::NeutralUnavailable(_) => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
