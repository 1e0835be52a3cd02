use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] wallrom::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{failed} of {total} sweep cells failed")]
    Partial { failed: usize, total: usize },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 2 configuration, 3 input/output, 4 numerical, 5 partial sweep.
    pub fn exit_code(&self) -> i32 {
        use wallrom::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Partial { .. } => 5,
            CliError::Core(e) => match e {
                E::InvalidArgument(_) | E::Shape { .. } => 2,
                E::Parse { .. } | E::Version { .. } | E::Corrupt(_) | E::Io(_) | E::Json(_) => 3,
                E::Singular(_) | E::Numerical(_) => 4,
            },
        }
    }
}
