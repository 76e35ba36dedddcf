use std::path::PathBuf;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// A malformed row in a text input; `line` is 1-based and counts the header.
    #[error("{origin}: line {line}: {message}")]
    Parse { origin: String, line: u64, message: String },
    #[error("{origin}: {source}")]
    Csv {
        origin: String,
        #[source]
        source: csv::Error,
    },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("config file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("manifest: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] plumenav_core::Error),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(origin: impl std::fmt::Display, source: csv::Error) -> Self {
        CliError::Csv {
            origin: origin.to_string(),
            source,
        }
    }
}
