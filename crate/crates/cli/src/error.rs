// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] resonant_shortcuts::Error),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid sequence document {path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// 2 for invalid input, 3 when no sequence exists, 4 for numeric failures,
    /// 1 for I/O problems.
    pub fn exit_code(&self) -> u8 {
        use resonant_shortcuts::Error as E;
        match self {
            CliError::Core(E::NoSolution { .. }) => 3,
            CliError::Core(E::Numeric(_)) => 4,
            CliError::Core(_) | CliError::Config(_) | CliError::Schema { .. } => 2,
            CliError::Io { .. } => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
