use std::path::PathBuf;

use thiserror::Error;

use crate::manifest::ConfigError;
use crate::table::TableError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("comparison failed: {0}")]
    CompareFailed(String),
}

impl CliError {
    /// 2 configuration or usage, 3 file access or format, 4 numerical,
    /// 5 failed comparison.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Table(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::CompareFailed(_) => 5,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

macro_rules! numerical {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Numerical(e.to_string())
            }
        }
    )*};
}

numerical!(wgqed::mps::MpsError, wgqed::sdw::SdwError, wgqed::oracles::OracleError);
