use std::collections::BTreeMap;

use graphsim_core::{seed, Choice, JudgmentRecord};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agreement::cohens_kappa;
use crate::correlation::{binned_delta, spearman};
use crate::StatsError;

pub const DEFAULT_RESAMPLES: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Kappa,
    Spearman,
}

/// One judge's answer on one trial: the choice and an ordinal strength (human or model
/// confidence, or a measure's binned similarity gap).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub choice: Choice,
    pub ordinal: Option<f64>,
}

/// A judge's successful answers keyed by trial id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct JudgeView {
    pub name: String,
    pub trials: BTreeMap<String, Observation>,
}

impl JudgeView {
    /// Ordinals come from the records' confidence. Failed records are left out.
    pub fn from_records(name: impl Into<String>, records: &[JudgmentRecord]) -> Self {
        let trials = records
            .iter()
            .filter(|r| r.is_ok())
            .map(|r| (r.trial_id.clone(), Observation { choice: r.choice, ordinal: r.confidence.map(f64::from) }))
            .collect();
        JudgeView { name: name.into(), trials }
    }

    /// Ordinals are the binned |S(Q,T_A) - S(Q,T_B)| gaps in `deltas`, keyed by trial id.
    pub fn from_scored(name: impl Into<String>, records: &[JudgmentRecord], deltas: &BTreeMap<String, f64>) -> Self {
        let ok: Vec<&JudgmentRecord> = records.iter().filter(|r| r.is_ok()).collect();
        let with_delta: Vec<(&str, f64)> = ok.iter().filter_map(|r| deltas.get(&r.trial_id).map(|&d| (r.trial_id.as_str(), d))).collect();
        let bins: BTreeMap<&str, u8> =
            with_delta.iter().map(|(id, _)| *id).zip(binned_delta(&with_delta.iter().map(|(_, d)| *d).collect::<Vec<_>>())).collect();
        let trials = ok
            .iter()
            .map(|r| {
                let ordinal = bins.get(r.trial_id.as_str()).map(|&b| f64::from(b));
                (r.trial_id.clone(), Observation { choice: r.choice, ordinal })
            })
            .collect();
        JudgeView { name: name.into(), trials }
    }

    pub fn get(&self, trial_id: &str) -> Option<&Observation> {
        self.trials.get(trial_id)
    }
}

/// The metric of `judge` against `human` over the given rows (repeats allowed).
pub fn metric_on(metric: Metric, judge: &[Observation], human: &[Observation], rows: &[usize]) -> Result<f64, StatsError> {
    match metric {
        Metric::Kappa => {
            let a: Vec<Choice> = rows.iter().map(|&i| judge[i].choice).collect();
            let b: Vec<Choice> = rows.iter().map(|&i| human[i].choice).collect();
            cohens_kappa(&a, &b)
        }
        Metric::Spearman => {
            let (a, b): (Vec<f64>, Vec<f64>) = rows.iter().filter_map(|&i| Some((judge[i].ordinal?, human[i].ordinal?))).unzip();
            spearman(&a, &b)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub metric: Metric,
    pub judge_a: String,
    pub judge_b: String,
    /// metric(a vs human) - metric(b vs human) on the observed trials.
    pub delta: f64,
    pub p: f64,
    pub n_trials: usize,
    /// Resamples on which both metrics were defined.
    pub valid_resamples: usize,
}

/// Paired bootstrap of the difference between two judges' agreement with humans.
/// Resampling is over trials both judges answered; resample `i` draws from its own
/// stream seeded by `(seed, i)`, so the result does not depend on thread scheduling.
pub fn bootstrap_diff(
    metric: Metric,
    judge_a: &JudgeView,
    judge_b: &JudgeView,
    human: &JudgeView,
    n_resamples: usize,
    seed_value: u64,
) -> Result<BootstrapResult, StatsError> {
    for id in judge_a.trials.keys().chain(judge_b.trials.keys()) {
        if human.get(id).is_none() {
            return Err(StatsError::Unpaired(id.clone()));
        }
    }
    let ids: Vec<&String> = judge_a.trials.keys().filter(|id| judge_b.trials.contains_key(*id)).collect();
    let pick = |v: &JudgeView| ids.iter().map(|id| v.trials[*id]).collect::<Vec<_>>();
    let (a, b, h) = (pick(judge_a), pick(judge_b), pick(human));
    let n = ids.len();
    let all: Vec<usize> = (0..n).collect();
    let delta = metric_on(metric, &a, &h, &all)? - metric_on(metric, &b, &h, &all)?;

    let deltas: Vec<f64> = (0..n_resamples)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = seed::rng(seed::derive_index(seed_value, i as u64));
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            Some(metric_on(metric, &a, &h, &rows).ok()? - metric_on(metric, &b, &h, &rows).ok()?)
        })
        .collect();
    let valid = deltas.len();
    let p = if valid == 0 {
        1.0
    } else {
        let le = deltas.iter().filter(|&&d| d <= 0.0).count() as f64 / valid as f64;
        let ge = deltas.iter().filter(|&&d| d >= 0.0).count() as f64 / valid as f64;
        (2.0 * le.min(ge)).min(1.0)
    };
    Ok(BootstrapResult {
        metric,
        judge_a: judge_a.name.clone(),
        judge_b: judge_b.name.clone(),
        delta,
        p,
        n_trials: n,
        valid_resamples: valid,
    })
}
