use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::io::{self, Write};

use graphsim_core::{Choice, JudgmentRecord};
use graphsim_harness::{Cell, Condition, InGroup, Session};
use serde::{Deserialize, Serialize};

use crate::agreement::{kappa_with_ci, KappaEstimate};
use crate::bootstrap::{bootstrap_diff, metric_on, BootstrapResult, JudgeView, Metric, DEFAULT_RESAMPLES};
use crate::criteria::{criteria_alignment, CriterionTally, SelectionRule};
use crate::hypothesis::{one_sample_ttest, TestResult};
use crate::StatsError;

/// What a trial showed and which target, if any, is the in-group answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialTruth {
    pub trial_id: String,
    pub triplet_id: String,
    pub session_id: String,
    pub cell: Cell,
    pub condition: Condition,
    pub in_group: InGroup,
}

impl TrialTruth {
    /// Correctness is defined only on distinct-group trials with a decision.
    pub fn correct(&self, choice: Choice) -> Option<bool> {
        match (self.in_group, choice) {
            (_, Choice::Abstain) | (InGroup::Both, _) => None,
            (InGroup::A, c) => Some(c == Choice::TargetA),
            (InGroup::B, c) => Some(c == Choice::TargetB),
        }
    }
}

pub fn truth_from_sessions(sessions: &[Session]) -> BTreeMap<String, TrialTruth> {
    sessions
        .iter()
        .flat_map(|s| {
            s.trials.iter().map(move |t| {
                let truth = TrialTruth {
                    trial_id: t.trial_id.clone(),
                    triplet_id: t.triplet.triplet_id.clone(),
                    session_id: s.session_id.clone(),
                    cell: t.triplet.cell,
                    condition: t.triplet.condition,
                    in_group: t.triplet.in_group_target,
                };
                (t.trial_id.clone(), truth)
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JudgeKind {
    Human,
    Measure,
    Model,
}

impl JudgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            JudgeKind::Human => "human",
            JudgeKind::Measure => "measure",
            JudgeKind::Model => "model",
        }
    }
}

/// One non-human judge. Measures carry their per-trial similarity gaps, which stand in
/// for confidence.
#[derive(Debug, Clone, PartialEq)]
pub struct JudgeInput {
    pub name: String,
    pub kind: JudgeKind,
    pub records: Vec<JudgmentRecord>,
    pub deltas: BTreeMap<String, f64>,
}

impl JudgeInput {
    pub fn model(name: impl Into<String>, records: Vec<JudgmentRecord>) -> Self {
        JudgeInput { name: name.into(), kind: JudgeKind::Model, records, deltas: BTreeMap::new() }
    }

    pub fn measure(name: impl Into<String>, records: Vec<JudgmentRecord>, deltas: BTreeMap<String, f64>) -> Self {
        JudgeInput { name: name.into(), kind: JudgeKind::Measure, records, deltas }
    }

    fn view(&self) -> JudgeView {
        match self.kind {
            JudgeKind::Measure => JudgeView::from_scored(&self.name, &self.records, &self.deltas),
            _ => JudgeView::from_records(&self.name, &self.records),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencySummary {
    pub n: usize,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub max_ms: u64,
}

fn latency_summary(records: &[JudgmentRecord]) -> Option<LatencySummary> {
    let mut ms: Vec<u64> = records.iter().filter(|r| r.is_ok()).filter_map(|r| r.latency_ms).collect();
    if ms.is_empty() {
        return None;
    }
    ms.sort_unstable();
    let n = ms.len();
    let median_ms = if n % 2 == 1 { ms[n / 2] as f64 } else { (ms[n / 2 - 1] + ms[n / 2]) as f64 / 2.0 };
    Some(LatencySummary { n, mean_ms: ms.iter().sum::<u64>() as f64 / n as f64, median_ms, max_ms: ms[n - 1] })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeRow {
    pub judge: String,
    pub kind: JudgeKind,
    pub records: usize,
    pub failed: usize,
    pub abstained: usize,
    pub kappa: Option<KappaEstimate>,
    pub rho: Option<f64>,
    pub rho_n: usize,
    pub accuracy: Option<f64>,
    pub accuracy_n: usize,
    pub latency: Option<LatencySummary>,
}

fn accuracy(view: &JudgeView, truth: &BTreeMap<String, TrialTruth>) -> (Option<f64>, usize) {
    let outcomes: Vec<bool> = view.trials.iter().filter_map(|(id, o)| truth.get(id)?.correct(o.choice)).collect();
    let n = outcomes.len();
    ((n > 0).then(|| outcomes.iter().filter(|&&c| c).count() as f64 / n as f64), n)
}

fn judge_row(input: &JudgeInput, view: &JudgeView, human: &JudgeView, truth: &BTreeMap<String, TrialTruth>) -> JudgeRow {
    let paired: Vec<&String> = view.trials.keys().filter(|id| human.trials.contains_key(*id)).collect();
    let a: Vec<_> = paired.iter().map(|id| view.trials[*id]).collect();
    let h: Vec<_> = paired.iter().map(|id| human.trials[*id]).collect();
    let choices = |v: &[crate::bootstrap::Observation]| v.iter().map(|o| o.choice).collect::<Vec<_>>();
    let all: Vec<usize> = (0..a.len()).collect();
    let rho_n = a.iter().zip(&h).filter(|(x, y)| x.ordinal.is_some() && y.ordinal.is_some()).count();
    let (acc, acc_n) = accuracy(view, truth);
    JudgeRow {
        judge: input.name.clone(),
        kind: input.kind,
        records: input.records.len(),
        failed: input.records.iter().filter(|r| !r.is_ok()).count(),
        abstained: view.trials.values().filter(|o| o.choice.is_abstain()).count(),
        kappa: kappa_with_ci(&choices(&a), &choices(&h)).ok(),
        rho: metric_on(Metric::Spearman, &a, &h, &all).ok(),
        rho_n,
        accuracy: acc,
        accuracy_n: acc_n,
        latency: latency_summary(&input.records),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub n_resamples: usize,
    pub seed: u64,
    pub rule: SelectionRule,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { n_resamples: DEFAULT_RESAMPLES, seed: 0, rule: SelectionRule::Positive }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriteriaTable {
    pub model: String,
    pub tallies: Vec<CriterionTally>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub options: ReportOptions,
    pub trials: usize,
    pub human: JudgeRow,
    /// Per-participant accuracy against chance (0.5); needs two or more participants.
    pub human_vs_chance: Option<TestResult>,
    pub judges: Vec<JudgeRow>,
    pub pairwise: Vec<BootstrapResult>,
    pub criteria: Vec<CriteriaTable>,
}

fn check_universe(human: &[JudgmentRecord], judges: &[JudgeInput], truth: &BTreeMap<String, TrialTruth>) -> Result<(), StatsError> {
    let bad = |why: String| Err(StatsError::InconsistentUniverse(why));
    let mut human_ids = HashSet::new();
    for r in human {
        if !truth.contains_key(&r.trial_id) {
            return bad(format!("human trial {} is not in the ground truth", r.trial_id));
        }
        if !human_ids.insert(r.trial_id.as_str()) {
            return bad(format!("two human records for trial {}", r.trial_id));
        }
    }
    for j in judges {
        let mut seen = HashSet::new();
        for r in &j.records {
            if !human_ids.contains(r.trial_id.as_str()) {
                return bad(format!("{} answered trial {} that has no human record", j.name, r.trial_id));
            }
            if !seen.insert(r.trial_id.as_str()) {
                return bad(format!("two records from {} for trial {}", j.name, r.trial_id));
            }
        }
    }
    Ok(())
}

/// Scores every judge against the human records and runs the pairwise bootstrap for
/// both metrics. Failed records are excluded from every statistic and counted per judge.
pub fn build_report(
    human: &[JudgmentRecord],
    judges: &[JudgeInput],
    truth: &BTreeMap<String, TrialTruth>,
    options: &ReportOptions,
) -> Result<AnalysisReport, StatsError> {
    check_universe(human, judges, truth)?;
    let human_input = JudgeInput { name: "human".into(), kind: JudgeKind::Human, records: human.to_vec(), deltas: BTreeMap::new() };
    let human_view = human_input.view();
    let (acc, acc_n) = accuracy(&human_view, truth);
    let human_row = JudgeRow {
        judge: "human".into(),
        kind: JudgeKind::Human,
        records: human.len(),
        failed: human.iter().filter(|r| !r.is_ok()).count(),
        abstained: human_view.trials.values().filter(|o| o.choice.is_abstain()).count(),
        kappa: None,
        rho: None,
        rho_n: 0,
        accuracy: acc,
        accuracy_n: acc_n,
        latency: latency_summary(human),
    };

    let mut per_person: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for r in human.iter().filter(|r| r.is_ok()) {
        if let Some(c) = truth.get(&r.trial_id).and_then(|t| t.correct(r.choice)) {
            let e = per_person.entry(r.respondent.as_str()).or_default();
            e.0 += usize::from(c);
            e.1 += 1;
        }
    }
    let person_acc: Vec<f64> = per_person.values().map(|&(c, n)| c as f64 / n as f64).collect();
    let human_vs_chance = one_sample_ttest(&person_acc, 0.5).ok();

    let views: Vec<JudgeView> = judges.iter().map(JudgeInput::view).collect();
    let rows = judges.iter().zip(&views).map(|(j, v)| judge_row(j, v, &human_view, truth)).collect();

    let mut pairwise = Vec::new();
    for i in 0..views.len() {
        for j in i + 1..views.len() {
            for metric in [Metric::Kappa, Metric::Spearman] {
                match bootstrap_diff(metric, &views[i], &views[j], &human_view, options.n_resamples, options.seed) {
                    Ok(r) => pairwise.push(r),
                    Err(StatsError::Degenerate(_) | StatsError::InsufficientData { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
    }

    let criteria = judges
        .iter()
        .filter(|j| j.kind == JudgeKind::Model)
        .map(|j| CriteriaTable { model: j.name.clone(), tallies: criteria_alignment(human, &j.records, options.rule) })
        .collect();

    Ok(AnalysisReport {
        options: options.clone(),
        trials: truth.len(),
        human: human_row,
        human_vs_chance,
        judges: rows,
        pairwise,
        criteria,
    })
}

fn fmt4(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.4}"))
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Judge, kind, kappa with interval, rho, accuracy, failures.
    pub fn table3_tsv(&self) -> String {
        let mut out =
            String::from("judge\tkind\tn\tkappa\tkappa_ci_low\tkappa_ci_high\trho\taccuracy\tfailed\tabstained\tmean_latency_ms\n");
        for r in &self.judges {
            let k = r.kappa;
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.judge,
                r.kind.as_str(),
                k.map_or(0, |k| k.n),
                fmt4(k.map(|k| k.kappa)),
                fmt4(k.map(|k| k.ci_low)),
                fmt4(k.map(|k| k.ci_high)),
                fmt4(r.rho),
                fmt4(r.accuracy),
                r.failed,
                r.abstained,
                fmt4(r.latency.map(|l| l.mean_ms)),
            );
        }
        out
    }

    /// Criterion, model, count, TP, FN.
    pub fn table4_tsv(&self) -> String {
        let mut out = String::from("criterion\tmodel\tcount\ttp\tfn\n");
        for t in &self.criteria {
            for c in &t.tallies {
                let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}", c.criterion, t.model, c.count, c.tp, c.fn_);
            }
        }
        out
    }

    pub fn pairwise_tsv(&self) -> String {
        let mut out = String::from("metric\tjudge_a\tjudge_b\tdelta\tp\tn_trials\tvalid_resamples\n");
        for r in &self.pairwise {
            let metric = match r.metric {
                Metric::Kappa => "kappa",
                Metric::Spearman => "spearman",
            };
            let _ =
                writeln!(out, "{metric}\t{}\t{}\t{:.4}\t{:.4}\t{}\t{}", r.judge_a, r.judge_b, r.delta, r.p, r.n_trials, r.valid_resamples);
        }
        out
    }

    /// Plain-text summary with four decimals.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Trials: {}", self.trials);
        let h = &self.human;
        let _ = writeln!(
            out,
            "Human records: {} (failed {}), accuracy {} over {} distinct-group trials",
            h.records,
            h.failed,
            fmt4(h.accuracy),
            h.accuracy_n
        );
        if let Some(t) = self.human_vs_chance {
            let _ = writeln!(out, "Participant accuracy vs 0.5: t = {:.4}, p = {:.4}", t.statistic, t.p);
        }
        let _ = writeln!(out, "\nAgreement with humans");
        let _ = writeln!(out, "{:<28} {:>8} {:>8} {:>19} {:>8} {:>8} {:>7}", "judge", "kind", "kappa", "95% CI", "rho", "acc", "failed");
        for r in &self.judges {
            let ci = r.kappa.map_or("NA".to_string(), |k| format!("[{:.4}, {:.4}]", k.ci_low, k.ci_high));
            let _ = writeln!(
                out,
                "{:<28} {:>8} {:>8} {:>19} {:>8} {:>8} {:>7}",
                r.judge,
                r.kind.as_str(),
                fmt4(r.kappa.map(|k| k.kappa)),
                ci,
                fmt4(r.rho),
                fmt4(r.accuracy),
                r.failed
            );
        }
        let latencies: Vec<&JudgeRow> = self.judges.iter().filter(|r| r.latency.is_some()).collect();
        if !latencies.is_empty() {
            let _ = writeln!(out, "\nLatency (ms)");
            for r in latencies {
                let l = r.latency.expect("filtered");
                let _ = writeln!(out, "{:<28} mean {:.4} median {:.4} max {} (n = {})", r.judge, l.mean_ms, l.median_ms, l.max_ms, l.n);
            }
        }
        if !self.pairwise.is_empty() {
            let significant = self.pairwise.iter().filter(|r| r.p < 0.05).count();
            let _ = writeln!(
                out,
                "\nPairwise bootstrap ({} resamples): {} comparisons, {} with p < 0.05",
                self.options.n_resamples,
                self.pairwise.len(),
                significant
            );
        }
        for t in &self.criteria {
            let _ = writeln!(out, "\nCriteria for {}", t.model);
            for c in &t.tallies {
                let _ = writeln!(out, "{:<16} count {:>5} TP {:>5} FN {:>5}", c.criterion, c.count, c.tp, c.fn_);
            }
        }
        out
    }
}

pub const TIDY_COLUMNS: [&str; 14] = [
    "trial_id",
    "triplet_id",
    "session_id",
    "source",
    "size",
    "density",
    "layout",
    "condition",
    "judge",
    "kind",
    "status",
    "choice",
    "correct",
    "ordinal",
];

/// One row per (trial, judge) with every design factor, for external modelling.
pub fn write_tidy_tsv<W: Write>(
    mut out: W,
    human: &[JudgmentRecord],
    judges: &[JudgeInput],
    truth: &BTreeMap<String, TrialTruth>,
) -> io::Result<()> {
    writeln!(out, "{}", TIDY_COLUMNS.join("\t"))?;
    let human_input = JudgeInput { name: "human".into(), kind: JudgeKind::Human, records: human.to_vec(), deltas: BTreeMap::new() };
    for j in std::iter::once(&human_input).chain(judges) {
        let view = j.view();
        for r in &j.records {
            let Some(t) = truth.get(&r.trial_id) else { continue };
            let judge = if j.kind == JudgeKind::Human { r.respondent.as_str() } else { j.name.as_str() };
            let obs = view.get(&r.trial_id);
            let correct = obs.and_then(|o| t.correct(o.choice)).map_or("NA".to_string(), |c| u8::from(c).to_string());
            let ordinal = obs.and_then(|o| o.ordinal).map_or("NA".to_string(), |v| v.to_string());
            let status = if r.is_ok() { "ok" } else { "failed" };
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                t.trial_id,
                t.triplet_id,
                t.session_id,
                t.cell.source.as_str(),
                t.cell.size.as_str(),
                t.cell.density.as_str(),
                t.cell.layout.as_str(),
                t.condition.as_str(),
                judge,
                j.kind.as_str(),
                status,
                r.choice.as_str(),
                correct,
                ordinal
            )?;
        }
    }
    Ok(())
}
