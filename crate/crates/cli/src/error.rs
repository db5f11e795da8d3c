use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: {msg}")]
    Index { line: usize, msg: String },
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] rembed_core::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag used in diagnostics.
    pub fn category(&self) -> &'static str {
        use rembed_core::Error as E;
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Index { .. } => "index",
            CliError::Format(_) => "format",
            CliError::Usage(_) => "usage",
            CliError::Core(e) => match e {
                E::Dimension(_) => "dimension",
                E::Validation(_) => "validation",
                E::NonFinite { .. } => "non-finite",
                E::Convergence { .. } => "convergence",
                E::Rank { .. } => "rank",
                E::Refused(_) => "refused",
            },
        }
    }

    /// Process exit status; 2 is shared with argument errors reported by clap.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "usage" => 2,
            "io" => 3,
            "parse" => 4,
            "index" => 5,
            "format" => 6,
            "dimension" => 7,
            "validation" => 8,
            "non-finite" => 9,
            "convergence" => 10,
            "rank" => 11,
            "refused" => 12,
            _ => 1,
        }
    }

    /// `error[category]: message`, on one line.
    pub fn diagnostic(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("error[{}]: {msg}", self.category())
    }
}
