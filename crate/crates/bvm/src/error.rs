use std::fmt;

use bvm_core::CoreError;

/// Invalid or unparseable configuration, located by field and line when known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: Option<String>,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: Some(field.into()),
            line: None,
            column: None,
            message: message.into(),
        }
    }

    pub fn message(message: impl Into<String>) -> Self {
        Self {
            field: None,
            line: None,
            column: None,
            message: message.into(),
        }
    }

    /// Fills in the line of the first `"field"` key in `source` if none is set.
    pub fn locate(mut self, source: &str) -> Self {
        if self.line.is_none() {
            if let Some(field) = &self.field {
                let key = format!("\"{field}\"");
                self.line = source.lines().position(|l| l.contains(&key)).map(|i| i + 1);
            }
        }
        self
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error")?;
        if let Some(field) = &self.field {
            write!(f, " in field `{field}`")?;
        }
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, " at line {l} column {c}")?,
            (Some(l), None) => write!(f, " at line {l}")?,
            _ => {}
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

impl From<serde_json::Error> for ConfigError {
    fn from(e: serde_json::Error) -> Self {
        let text = e.to_string();
        // serde reports "missing field `x`" / "unknown field `x`, expected ..."
        let field = text
            .split_once('`')
            .and_then(|(_, rest)| rest.split_once('`'))
            .map(|(name, _)| name.to_string())
            .filter(|_| text.contains("field"));
        let message = match text.rfind(" at line ") {
            Some(i) => text[..i].to_string(),
            None => text,
        };
        Self {
            field,
            line: (e.line() > 0).then_some(e.line()),
            column: (e.column() > 0).then_some(e.column()),
            message,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BvmError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] CoreError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl BvmError {
    /// Process exit code: 2 for configuration errors, 3 for numerical
    /// failures, 1 for i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            BvmError::Config(_) => 2,
            BvmError::Numerical(_) => 3,
            BvmError::Io(_) | BvmError::Csv(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, BvmError>;
