use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: irrcast::Error,
    },

    #[error(transparent)]
    Core(irrcast::Error),

    #[error("internal error: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        let internal = match self {
            CliError::Invariant(_) => true,
            CliError::Core(e) | CliError::File { source: e, .. } => matches!(e, irrcast::Error::Dimension { .. }),
            CliError::Config(_) => false,
        };
        ExitCode::from(if internal { 2 } else { 1 })
    }
}

impl From<irrcast::Error> for CliError {
    fn from(e: irrcast::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

/// Attaches the file a core error came from.
pub fn in_file(path: impl Into<PathBuf>) -> impl FnOnce(irrcast::Error) -> CliError {
    let path = path.into();
    move |source| CliError::File { path, source }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
