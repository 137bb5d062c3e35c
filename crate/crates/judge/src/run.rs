use std::sync::Arc;

use graphsim_core::record::Provenance;
use graphsim_core::JudgmentRecord;
use graphsim_harness::Trial;
use serde::{Deserialize, Serialize};
use tokio::sync::{mpsc, Semaphore};
use tokio::task::JoinSet;

use crate::config::ModelConfig;
use crate::parse::{parse_response, slot_to_choice};
use crate::prompt::{build_prompt, ImageSource, PromptBundle, PROMPT_SHA256};
use crate::provider::Provider;
use crate::query::query_model;
use crate::JudgeError;

pub type SharedImages = Arc<dyn ImageSource + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub model: String,
    /// `None` when the provider ran at its own default.
    pub temperature: Option<f64>,
    pub trials: usize,
    pub ok: usize,
    pub failed: usize,
    pub repaired: usize,
    /// Records sorted by trial id.
    pub records: Vec<JudgmentRecord>,
}

impl RunSummary {
    pub fn repair_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.repaired as f64 / self.trials as f64
        }
    }
}

fn provenance(cfg: &ModelConfig, bundle: Option<&PromptBundle>, attempts: u32, repaired: bool) -> Provenance {
    Provenance {
        model: cfg.model_name.clone(),
        prompt_sha256: PROMPT_SHA256.to_string(),
        image_sha256: bundle.map(PromptBundle::image_hashes).unwrap_or_default(),
        attempts,
        temperature: cfg.effective_temperature(),
        repaired,
    }
}

/// Judges one trial. Never fails: problems become a failed record.
pub async fn judge_trial<P: Provider>(provider: &P, cfg: &ModelConfig, trial: &Trial, images: &dyn ImageSource) -> JudgmentRecord {
    let failed = |error: String, bundle: Option<&PromptBundle>, attempts: u32, repaired: bool| JudgmentRecord {
        provenance: Some(provenance(cfg, bundle, attempts, repaired)),
        ..JudgmentRecord::failed(&cfg.model_name, &trial.trial_id, &trial.triplet.triplet_id, error)
    };
    let bundle = match build_prompt(trial, images) {
        Ok(b) => b,
        Err(e) => return failed(e.to_string(), None, 0, false),
    };
    let first = match query_model(provider, cfg, &bundle).await {
        Ok(o) => o,
        Err(f) => return failed(f.to_string(), Some(&bundle), f.attempts, false),
    };
    let mut attempts = first.attempts;
    let (parsed, latency_ms, repaired) = match parse_response(&first.text) {
        Ok(r) => (r, first.latency_ms, false),
        Err(parse_error) => {
            tracing::info!(trial = %trial.trial_id, %parse_error, "reprompting");
            let second = match query_model(provider, cfg, &bundle.with_repair(&first.text)).await {
                Ok(o) => o,
                Err(f) => return failed(f.to_string(), Some(&bundle), attempts + f.attempts, true),
            };
            attempts += second.attempts;
            match parse_response(&second.text) {
                Ok(r) => (r, second.latency_ms, true),
                Err(e) => return failed(format!("unparseable reply: {e}"), Some(&bundle), attempts, true),
            }
        }
    };
    JudgmentRecord {
        criteria: parsed.criteria,
        confidence: Some(parsed.confidence),
        latency_ms: Some(latency_ms),
        rationale: Some(parsed.rationale),
        provenance: Some(provenance(cfg, Some(&bundle), attempts, repaired)),
        ..JudgmentRecord::new(
            &cfg.model_name,
            &trial.trial_id,
            &trial.triplet.triplet_id,
            slot_to_choice(parsed.selected, &trial.placement, &trial.triplet),
        )
    }
}

/// Judges every trial with at most `cfg.max_concurrent` requests in flight. Records are
/// handed to `sink` one at a time, in completion order, from the calling task.
pub async fn run_benchmark<P, S>(
    provider: Arc<P>,
    cfg: &ModelConfig,
    trials: Vec<Trial>,
    images: SharedImages,
    mut sink: S,
) -> Result<RunSummary, JudgeError>
where
    P: Provider,
    S: FnMut(&JudgmentRecord) -> Result<(), JudgeError>,
{
    let total = trials.len();
    let limit = Arc::new(Semaphore::new(cfg.max_concurrent.max(1)));
    let (tx, mut rx) = mpsc::channel::<JudgmentRecord>(cfg.max_concurrent.max(1) * 2);
    let mut tasks = JoinSet::new();
    for trial in trials {
        let (provider, cfg, images, limit, tx) = (provider.clone(), cfg.clone(), images.clone(), limit.clone(), tx.clone());
        tasks.spawn(async move {
            let _permit = limit.acquire_owned().await.expect("semaphore open");
            let record = judge_trial(provider.as_ref(), &cfg, &trial, images.as_ref()).await;
            let _ = tx.send(record).await;
        });
    }
    drop(tx);

    let mut records = Vec::with_capacity(total);
    let mut sink_error = None;
    while let Some(record) = rx.recv().await {
        if sink_error.is_none() {
            if let Err(e) = sink(&record) {
                sink_error = Some(e);
                tasks.abort_all();
            }
        }
        records.push(record);
    }
    while let Some(joined) = tasks.join_next().await {
        if let Err(e) = joined {
            if e.is_panic() {
                std::panic::resume_unwind(e.into_panic());
            }
        }
    }
    if let Some(e) = sink_error {
        return Err(e);
    }
    records.sort_by(|a, b| a.trial_id.cmp(&b.trial_id));
    let ok = records.iter().filter(|r| r.is_ok()).count();
    let repaired = records.iter().filter(|r| r.provenance.as_ref().is_some_and(|p| p.repaired)).count();
    let summary = RunSummary {
        model: cfg.model_name.clone(),
        temperature: cfg.effective_temperature(),
        trials: total,
        ok,
        failed: records.len() - ok,
        repaired,
        records,
    };
    tracing::info!(model = %summary.model, ok, failed = summary.failed, repaired, "run finished");
    Ok(summary)
}
