use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    OpenAi,
    Anthropic,
    Gemini,
    Mock,
}

/// Connection and sampling settings for one model. Only the name of the credential
/// variable is stored; its value is read from the environment when a request is made.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub provider: ProviderKind,
    pub model_name: String,
    #[serde(default)]
    pub endpoint: String,
    #[serde(default)]
    pub credential_env: Option<String>,
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default = "yes")]
    pub supports_temperature: bool,
    #[serde(default = "default_concurrency")]
    pub max_concurrent: usize,
    /// Retries after the first attempt.
    #[serde(default = "default_retries")]
    pub retry_budget: u32,
    #[serde(default = "default_backoff")]
    pub backoff_initial_ms: u64,
    #[serde(default = "default_timeout")]
    pub timeout_ms: u64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
}

fn yes() -> bool {
    true
}
fn default_concurrency() -> usize {
    4
}
fn default_retries() -> u32 {
    5
}
fn default_backoff() -> u64 {
    1000
}
fn default_timeout() -> u64 {
    120_000
}
fn default_max_tokens() -> u32 {
    1024
}

impl ModelConfig {
    pub fn new(provider: ProviderKind, model_name: impl Into<String>, endpoint: impl Into<String>) -> Self {
        ModelConfig {
            provider,
            model_name: model_name.into(),
            endpoint: endpoint.into(),
            credential_env: None,
            temperature: None,
            supports_temperature: true,
            max_concurrent: default_concurrency(),
            retry_budget: default_retries(),
            backoff_initial_ms: default_backoff(),
            timeout_ms: default_timeout(),
            max_tokens: default_max_tokens(),
        }
    }

    pub fn mock(model_name: impl Into<String>) -> Self {
        Self::new(ProviderKind::Mock, model_name, "")
    }

    /// Temperature sent with each request: zero unless overridden, and nothing at all
    /// for providers that do not accept one.
    pub fn effective_temperature(&self) -> Option<f64> {
        self.supports_temperature.then(|| self.temperature.unwrap_or(0.0))
    }

    pub fn credential(&self) -> Option<String> {
        self.credential_env.as_deref().and_then(|name| std::env::var(name).ok()).filter(|v| !v.is_empty())
    }
}
