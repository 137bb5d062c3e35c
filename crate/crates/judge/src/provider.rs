//! Provider adapters: HTTP endpoints for the hosted models and a deterministic mock.

use std::collections::HashMap;
use std::future::Future;
use std::sync::Mutex;
use std::time::Duration;

use serde_json::{json, Value};

use crate::config::{ModelConfig, ProviderKind};
use crate::prompt::{sha256_hex, PromptBundle, REPAIR_NOTE};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProviderError {
    /// Worth retrying: rate limits, server errors, timeouts, connection failures.
    #[error("transient: {0}")]
    Transient(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("request rejected: {0}")]
    Fatal(String),
}

impl ProviderError {
    pub fn is_transient(&self) -> bool {
        matches!(self, ProviderError::Transient(_))
    }
}

pub trait Provider: Send + Sync + 'static {
    /// Sends one request and returns the model's text reply.
    fn complete(&self, cfg: &ModelConfig, bundle: &PromptBundle) -> impl Future<Output = Result<String, ProviderError>> + Send;
}

pub fn classify_status(status: u16, body: &str) -> ProviderError {
    let msg = format!("HTTP {status}: {}", body.chars().take(200).collect::<String>());
    match status {
        401 | 403 => ProviderError::Auth(msg),
        408 | 429 | 500..=599 => ProviderError::Transient(msg),
        _ => ProviderError::Fatal(msg),
    }
}

/// Request body in the wire format of `kind`. Images follow the prompt in Q, T1, T2
/// order, each preceded by its slot label.
pub fn request_body(kind: ProviderKind, cfg: &ModelConfig, bundle: &PromptBundle) -> Value {
    let temperature = cfg.effective_temperature();
    match kind {
        ProviderKind::OpenAi | ProviderKind::Mock => {
            let mut content = vec![json!({"type": "text", "text": bundle.prompt})];
            for img in &bundle.images {
                content.push(json!({"type": "text", "text": format!("{}:", img.label)}));
                content.push(json!({
                    "type": "image_url",
                    "image_url": {"url": format!("data:image/png;base64,{}", img.base64())}
                }));
            }
            let mut messages = vec![json!({"role": "user", "content": content})];
            if let Some(prev) = &bundle.repair_of {
                messages.push(json!({"role": "assistant", "content": prev}));
                messages.push(json!({"role": "user", "content": REPAIR_NOTE}));
            }
            let mut body = json!({"model": cfg.model_name, "messages": messages, "max_tokens": cfg.max_tokens});
            if let Some(t) = temperature {
                body["temperature"] = json!(t);
            }
            body
        }
        ProviderKind::Anthropic => {
            let mut content = vec![json!({"type": "text", "text": bundle.prompt})];
            for img in &bundle.images {
                content.push(json!({"type": "text", "text": format!("{}:", img.label)}));
                content.push(json!({
                    "type": "image",
                    "source": {"type": "base64", "media_type": "image/png", "data": img.base64()}
                }));
            }
            let mut messages = vec![json!({"role": "user", "content": content})];
            if let Some(prev) = &bundle.repair_of {
                messages.push(json!({"role": "assistant", "content": prev}));
                messages.push(json!({"role": "user", "content": REPAIR_NOTE}));
            }
            let mut body = json!({"model": cfg.model_name, "messages": messages, "max_tokens": cfg.max_tokens});
            if let Some(t) = temperature {
                body["temperature"] = json!(t);
            }
            body
        }
        ProviderKind::Gemini => {
            let mut parts = vec![json!({"text": bundle.prompt})];
            for img in &bundle.images {
                parts.push(json!({"text": format!("{}:", img.label)}));
                parts.push(json!({"inline_data": {"mime_type": "image/png", "data": img.base64()}}));
            }
            let mut contents = vec![json!({"role": "user", "parts": parts})];
            if let Some(prev) = &bundle.repair_of {
                contents.push(json!({"role": "model", "parts": [{"text": prev}]}));
                contents.push(json!({"role": "user", "parts": [{"text": REPAIR_NOTE}]}));
            }
            let mut generation = json!({"maxOutputTokens": cfg.max_tokens});
            if let Some(t) = temperature {
                generation["temperature"] = json!(t);
            }
            json!({"contents": contents, "generationConfig": generation})
        }
    }
}

/// The reply text from a provider response body.
pub fn response_text(kind: ProviderKind, body: &Value) -> Option<String> {
    let join = |items: &Vec<Value>, key: &str| -> String {
        items.iter().filter_map(|p| p.get(key).and_then(Value::as_str)).collect::<Vec<_>>().join("")
    };
    match kind {
        ProviderKind::OpenAi | ProviderKind::Mock => match &body["choices"][0]["message"]["content"] {
            Value::String(s) => Some(s.clone()),
            Value::Array(parts) => Some(join(parts, "text")),
            _ => None,
        },
        ProviderKind::Anthropic => body["content"].as_array().map(|c| join(c, "text")),
        ProviderKind::Gemini => body["candidates"][0]["content"]["parts"].as_array().map(|p| join(p, "text")),
    }
}

/// Speaks the provider's HTTP API. `Mock` configs are sent in the OpenAI format, which
/// lets tests point a config at a local server.
#[derive(Debug, Clone)]
pub struct HttpProvider {
    client: reqwest::Client,
}

impl HttpProvider {
    pub fn new() -> Result<Self, ProviderError> {
        let client = reqwest::Client::builder().build().map_err(|e| ProviderError::Fatal(e.to_string()))?;
        Ok(HttpProvider { client })
    }
}

impl Provider for HttpProvider {
    async fn complete(&self, cfg: &ModelConfig, bundle: &PromptBundle) -> Result<String, ProviderError> {
        let body = request_body(cfg.provider, cfg, bundle);
        let mut req = self.client.post(&cfg.endpoint).timeout(Duration::from_millis(cfg.timeout_ms)).json(&body);
        let key = cfg.credential();
        if cfg.credential_env.is_some() && key.is_none() {
            return Err(ProviderError::Auth(format!("{} is not set", cfg.credential_env.as_deref().unwrap_or(""))));
        }
        if let Some(key) = key {
            req = match cfg.provider {
                ProviderKind::OpenAi | ProviderKind::Mock => req.bearer_auth(key),
                ProviderKind::Anthropic => req.header("x-api-key", key).header("anthropic-version", "2023-06-01"),
                ProviderKind::Gemini => req.header("x-goog-api-key", key),
            };
        }
        let resp = req.send().await.map_err(|e| ProviderError::Transient(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp.text().await.map_err(|e| ProviderError::Transient(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(classify_status(status, &text));
        }
        let json: Value = serde_json::from_str(&text).map_err(|e| ProviderError::Fatal(format!("response body: {e}")))?;
        response_text(cfg.provider, &json).ok_or_else(|| ProviderError::Fatal("response carries no text".into()))
    }
}

/// Scripted behaviour for one trial of the mock.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MockReply {
    Text(String),
    /// An unparseable reply on the first call, then the default answer.
    MalformedOnce,
    Malformed,
    Transient,
    Auth,
}

/// Answers derived from a hash of the trial's images, so reruns are identical.
#[derive(Debug, Default)]
pub struct MockProvider {
    pub latency: Duration,
    pub script: HashMap<String, MockReply>,
    calls: Mutex<HashMap<String, u32>>,
}

impl MockProvider {
    pub fn new(latency: Duration) -> Self {
        MockProvider { latency, ..Default::default() }
    }

    pub fn with_script(mut self, trial_id: impl Into<String>, reply: MockReply) -> Self {
        self.script.insert(trial_id.into(), reply);
        self
    }

    pub fn calls(&self, trial_id: &str) -> u32 {
        self.calls.lock().expect("mock lock").get(trial_id).copied().unwrap_or(0)
    }

    pub fn default_answer(bundle: &PromptBundle) -> String {
        let digest = sha256_hex(bundle.image_hashes().concat().as_bytes());
        let bytes = digest.as_bytes();
        let selected = if bytes[0].is_multiple_of(2) { "T1" } else { "T2" };
        let confidence = 1 + bytes[1] % 5;
        let criteria: Vec<i8> = bytes[2..8].iter().map(|b| (b % 3) as i8 - 1).collect();
        json!({
            "selected": selected,
            "rationale": format!("mock judgment {}", &digest[..8]),
            "confidence": confidence,
            "features": criteria,
        })
        .to_string()
    }
}

impl Provider for MockProvider {
    async fn complete(&self, _cfg: &ModelConfig, bundle: &PromptBundle) -> Result<String, ProviderError> {
        let call = {
            let mut calls = self.calls.lock().expect("mock lock");
            let n = calls.entry(bundle.trial_id.clone()).or_default();
            *n += 1;
            *n
        };
        if !self.latency.is_zero() {
            tokio::time::sleep(self.latency).await;
        }
        match self.script.get(&bundle.trial_id) {
            None => Ok(Self::default_answer(bundle)),
            Some(MockReply::Text(t)) => Ok(t.clone()),
            Some(MockReply::MalformedOnce) if call == 1 => Ok("I think the first one.".into()),
            Some(MockReply::MalformedOnce) => Ok(Self::default_answer(bundle)),
            Some(MockReply::Malformed) => Ok("{\"selected\": \"T3\"}".into()),
            Some(MockReply::Transient) => Err(ProviderError::Transient("mock outage".into())),
            Some(MockReply::Auth) => Err(ProviderError::Auth("mock key rejected".into())),
        }
    }
}
