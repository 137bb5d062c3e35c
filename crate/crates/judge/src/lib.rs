//! Relative-comparison judgments from vision-capable models.

pub mod config;
pub mod parse;
pub mod prompt;
pub mod provider;
pub mod query;
pub mod run;

pub use config::{ModelConfig, ProviderKind};
pub use parse::{parse_response, slot_to_choice, ModelResponse, ParseError, Slot};
pub use prompt::{build_prompt, sha256_hex, DirImages, ImageAttachment, ImageSource, PromptBundle, PROMPT, PROMPT_SHA256};
pub use provider::{HttpProvider, MockProvider, MockReply, Provider, ProviderError};
pub use query::{query_model, QueryFailure, QueryOutcome};
pub use run::{judge_trial, run_benchmark, RunSummary, SharedImages};

#[derive(Debug, thiserror::Error)]
pub enum JudgeError {
    #[error("trial {trial_id}: no image for {stimulus_id}")]
    MissingImage { trial_id: String, stimulus_id: String },
    #[error("{0} is not a PNG image")]
    InvalidImage(String),
    #[error("{stimulus_id} is {width}x{height}, larger than the model input limit")]
    ImageTooLarge { stimulus_id: String, width: u32, height: u32 },
    #[error(transparent)]
    Store(#[from] graphsim_core::store::StoreError),
}
