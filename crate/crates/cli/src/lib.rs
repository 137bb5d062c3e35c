//! Pipeline stages, run configuration and the study service behind the `graphsim` binary.

pub mod config;
pub mod layout;
pub mod pipeline;
pub mod service;

use std::path::{Path, PathBuf};

pub use config::{Coverage, Overrides, RealSource, RunConfig, ServeConfig};
pub use layout::OutputLayout;
pub use pipeline::{Pipeline, StageReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path} is missing; run `graphsim {stage}` first")]
    MissingInput { path: PathBuf, stage: &'static str },
    #[error("no human judgments at {0}; collect them with `graphsim serve` first")]
    MissingJudgments(PathBuf),
    #[error("no provider named {0} in the config")]
    UnknownProvider(String),
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Generate(#[from] graphsim_core::GenerateError),
    #[error(transparent)]
    Graph(#[from] graphsim_core::GraphError),
    #[error(transparent)]
    Render(#[from] graphsim_render::RenderError),
    #[error(transparent)]
    Harness(#[from] graphsim_harness::HarnessError),
    #[error(transparent)]
    Measure(#[from] graphsim_measures::MeasureError),
    #[error(transparent)]
    Provider(#[from] graphsim_judge::ProviderError),
    #[error(transparent)]
    Judge(#[from] graphsim_judge::JudgeError),
    #[error(transparent)]
    Store(#[from] graphsim_core::store::StoreError),
    #[error(transparent)]
    Stats(#[from] graphsim_analysis::StatsError),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn parse(path: &Path, message: impl ToString) -> Self {
        CliError::Parse { path: path.to_path_buf(), message: message.to_string() }
    }
}
