//! Agreement between judges and human participants, with the supporting significance
//! tests.

pub mod agreement;
pub mod bootstrap;
pub mod correlation;
pub mod criteria;
pub mod hypothesis;
pub mod report;

pub use agreement::{cohens_kappa, kappa_from_table, kappa_with_ci, measure_choice, measure_judgment, KappaEstimate};
pub use bootstrap::{bootstrap_diff, BootstrapResult, JudgeView, Metric, Observation, DEFAULT_RESAMPLES};
pub use correlation::{binned_delta, spearman};
pub use criteria::{criteria_alignment, CriterionTally, SelectionRule};
pub use hypothesis::{mann_whitney_u, one_sample_ttest, wilcoxon_signed_rank, TestResult};
pub use report::{
    build_report, truth_from_sessions, write_tidy_tsv, AnalysisReport, JudgeInput, JudgeKind, JudgeRow, ReportOptions, TrialTruth,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("inputs differ in length")]
    LengthMismatch,
    #[error("need at least {needed} usable values, found {found}")]
    InsufficientData { needed: usize, found: usize },
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("trial {0} has no human record")]
    Unpaired(String),
    #[error("inconsistent trial universe: {0}")]
    InconsistentUniverse(String),
}
