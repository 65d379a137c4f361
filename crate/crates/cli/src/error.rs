use std::io;

use otto_core::OttoError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] OttoError),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("{failed} of {total} rows failed")]
    RowsFailed { failed: usize, total: usize },
    #[error("verification failed")]
    VerifyFailed,
}

impl CliError {
    /// 1: a check failed; 2: bad input or unwritable output; 3: numerics.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::VerifyFailed => 1,
            CliError::Model(e) => match e {
                OttoError::InvalidOrientation { .. }
                | OttoError::InvalidParameter { .. }
                | OttoError::UnstablePump { .. } => 2,
                _ => 3,
            },
            CliError::Grid(_) | CliError::Io { .. } | CliError::Csv(_) | CliError::Pool(_) => 2,
            CliError::RowsFailed { .. } => 3,
        }
    }
}
