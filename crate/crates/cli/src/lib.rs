// Copyright 2026 uscsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: strict config ingestion, sweep orchestration and
//! deterministic CSV and ellipse output.

pub mod config;
pub mod ellipse;
pub mod run;

pub use config::{config_from_header, parse_config, ConfigError, Mode, Overrides, RunConfig, Units};
pub use ellipse::{ellipses, emit_ellipses, Ellipse};
pub use run::{run, Artifacts, RunOptions, Status};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] uscsim_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl RunError {
    /// 2 for model-invalid or unstable regimes, 1 for everything the user must fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Model(_) => 2,
            _ => 1,
        }
    }
}
