use std::time::{Duration, Instant};

use rand::Rng;

use crate::config::ModelConfig;
use crate::prompt::PromptBundle;
use crate::provider::{Provider, ProviderError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryOutcome {
    pub text: String,
    /// Request-to-response time of the successful attempt.
    pub latency_ms: u64,
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{error} after {attempts} attempt(s)")]
pub struct QueryFailure {
    pub error: ProviderError,
    pub attempts: u32,
}

/// Delay before retry number `retry` (0-based): the initial delay doubled per retry,
/// stretched by up to 25% jitter.
pub fn backoff_delay(cfg: &ModelConfig, retry: u32, jitter: f64) -> Duration {
    let base = cfg.backoff_initial_ms.saturating_mul(1u64 << retry.min(20)) as f64;
    Duration::from_millis((base * (1.0 + 0.25 * jitter.clamp(0.0, 1.0))).round() as u64)
}

/// Calls the provider, retrying transient failures up to the configured budget.
pub async fn query_model<P: Provider>(provider: &P, cfg: &ModelConfig, bundle: &PromptBundle) -> Result<QueryOutcome, QueryFailure> {
    let mut attempts = 0;
    loop {
        attempts += 1;
        let start = Instant::now();
        let result = provider.complete(cfg, bundle).await;
        let latency_ms = start.elapsed().as_millis() as u64;
        match result {
            Ok(text) => {
                tracing::debug!(trial = %bundle.trial_id, attempts, latency_ms, "reply received");
                return Ok(QueryOutcome { text, latency_ms, attempts });
            }
            Err(error) if error.is_transient() && attempts <= cfg.retry_budget => {
                let delay = backoff_delay(cfg, attempts - 1, rand::rng().random());
                tracing::warn!(trial = %bundle.trial_id, attempts, %error, ?delay, "retrying");
                tokio::time::sleep(delay).await;
            }
            Err(error) => {
                tracing::warn!(trial = %bundle.trial_id, attempts, %error, "giving up");
                return Err(QueryFailure { error, attempts });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backoff_doubles() {
        let cfg = ModelConfig::mock("m");
        let ms: Vec<u128> = (0..5).map(|r| backoff_delay(&cfg, r, 0.0).as_millis()).collect();
        assert_eq!(ms, [1000, 2000, 4000, 8000, 16000]);
        assert_eq!(backoff_delay(&cfg, 1, 1.0).as_millis(), 2500);
    }
}
