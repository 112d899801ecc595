//! Library side of the `textmine` command: configuration, the end-to-end
//! pipeline and the single-stage subcommands.

use std::path::PathBuf;

pub mod config;
pub mod pipeline;

pub use config::PipelineConfig;
pub use pipeline::{run_pipeline, run_step, RunManifest, Step};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("missing dependency: {artifact} not found in {dir}; run `{producer}` first", dir = .dir.display())]
    Dependency {
        artifact: String,
        dir: PathBuf,
        producer: &'static str,
    },

    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: textmine::Error,
    },
}

impl CliError {
    /// 1 for configuration and dependency problems, 2 for failures inside a stage.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Dependency { .. } => 1,
            CliError::Stage { .. } => 2,
        }
    }
}
