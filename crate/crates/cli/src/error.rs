use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] glt_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: glt_core::Error,
    },
    #[error("{path}: {message}")]
    ConfigParse { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: line {line}: {reason}")]
    Table { path: PathBuf, line: usize, reason: String },
}

/// Coarse error class, used for the diagnostic prefix and the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Io,
    Parse,
    Contract,
}

impl ErrorClass {
    pub fn label(self) -> &'static str {
        match self {
            ErrorClass::Io => "io error",
            ErrorClass::Parse => "parse error",
            ErrorClass::Contract => "contract error",
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            ErrorClass::Io => 2,
            ErrorClass::Parse => 3,
            ErrorClass::Contract => 4,
        }
    }
}

fn core_class(e: &glt_core::Error) -> ErrorClass {
    use glt_core::Error as E;
    match e {
        E::Io { .. } => ErrorClass::Io,
        E::MalformedCsv { .. } | E::Checkpoint { .. } => ErrorClass::Parse,
        _ => ErrorClass::Contract,
    }
}

impl CliError {
    pub fn class(&self) -> ErrorClass {
        match self {
            CliError::Core(e) | CliError::InFile { source: e, .. } => core_class(e),
            CliError::Io { .. } => ErrorClass::Io,
            CliError::ConfigParse { .. } | CliError::Table { .. } => ErrorClass::Parse,
            CliError::Config(_) => ErrorClass::Contract,
        }
    }

    /// Single-line diagnostic with the class prefix.
    pub fn diagnostic(&self) -> String {
        let text = self.to_string().replace('\n', " ");
        format!("{}: {text}", self.class().label())
    }
}

/// Attaches the file a core error came from, unless it already names it.
pub(crate) fn in_file(path: impl Into<PathBuf>) -> impl FnOnce(glt_core::Error) -> CliError {
    let path = path.into();
    move |source| match source {
        glt_core::Error::Io { .. } => CliError::Core(source),
        _ => CliError::InFile { path, source },
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.into(),
        source,
    }
}
