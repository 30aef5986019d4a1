use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(iirnet::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::Core(iirnet::Error::Io {
            path: PathBuf::from(path),
            source: e,
        })
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Core(iirnet::Error::InvalidArgument(_)) => 2,
            Self::Core(e) if e.is_numeric() => 4,
            Self::Core(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "usage",
            4 => "numeric",
            _ => "data",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => f.write_str(m),
            Self::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<iirnet::Error> for CliError {
    fn from(e: iirnet::Error) -> Self {
        Self::Core(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Core(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;
