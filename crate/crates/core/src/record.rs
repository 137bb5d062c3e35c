//! The judgment record shared by humans, models and measures.

use std::fmt;

use serde::{Deserialize, Serialize};

/// The six decision criteria, in the order used by every criteria array.
pub const CRITERIA: [&str; 6] = ["Overall Shape", "Local Shapes", "Graph Size", "Node Degrees", "Edge Density", "Communities"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Choice {
    #[serde(rename = "T_A")]
    TargetA,
    #[serde(rename = "T_B")]
    TargetB,
    #[serde(rename = "abstain")]
    Abstain,
}

impl Choice {
    pub fn as_str(self) -> &'static str {
        match self {
            Choice::TargetA => "T_A",
            Choice::TargetB => "T_B",
            Choice::Abstain => "abstain",
        }
    }

    pub fn is_abstain(self) -> bool {
        self == Choice::Abstain
    }
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    #[default]
    Ok,
    Failed,
}

/// Where a model judgment came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub model: String,
    pub prompt_sha256: String,
    pub image_sha256: Vec<String>,
    pub attempts: u32,
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub repaired: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgmentRecord {
    pub respondent: String,
    pub trial_id: String,
    pub triplet_id: String,
    pub choice: Choice,
    /// Humans use 0/1 (selected or not); models use -1/0/1 contributions.
    #[serde(default)]
    pub criteria: [i8; 6],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
    #[serde(default)]
    pub status: RecordStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub client_elapsed_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    fn new(field: &str, message: impl Into<String>) -> Self {
        Self { field: field.to_string(), message: message.into() }
    }
}

impl JudgmentRecord {
    /// A decision with empty criteria and no optional fields.
    pub fn new(respondent: impl Into<String>, trial_id: impl Into<String>, triplet_id: impl Into<String>, choice: Choice) -> Self {
        Self {
            respondent: respondent.into(),
            trial_id: trial_id.into(),
            triplet_id: triplet_id.into(),
            choice,
            criteria: [0; 6],
            confidence: None,
            latency_ms: None,
            rationale: None,
            status: RecordStatus::Ok,
            error: None,
            client_elapsed_ms: None,
            provenance: None,
        }
    }

    /// Marker for a trial the judge could not answer.
    pub fn failed(
        respondent: impl Into<String>,
        trial_id: impl Into<String>,
        triplet_id: impl Into<String>,
        error: impl Into<String>,
    ) -> Self {
        Self { status: RecordStatus::Failed, error: Some(error.into()), ..Self::new(respondent, trial_id, triplet_id, Choice::Abstain) }
    }

    pub fn is_ok(&self) -> bool {
        self.status == RecordStatus::Ok
    }

    /// Whether criterion `i` counts as selected: a positive entry for either scale.
    pub fn selects(&self, i: usize) -> bool {
        self.criteria[i] == 1
    }

    /// Schema checks shared by every respondent type.
    pub fn validate(&self) -> Result<(), Vec<FieldError>> {
        let mut errors = Vec::new();
        if self.respondent.trim().is_empty() {
            errors.push(FieldError::new("respondent", "must not be empty"));
        }
        if self.trial_id.trim().is_empty() {
            errors.push(FieldError::new("trial_id", "must not be empty"));
        }
        if let Some(c) = self.confidence {
            if !(1..=5).contains(&c) {
                errors.push(FieldError::new("confidence", format!("{c} is outside 1..=5")));
            }
        }
        for (i, &c) in self.criteria.iter().enumerate() {
            if !(-1..=1).contains(&c) {
                errors.push(FieldError::new(&format!("criteria[{i}]"), format!("{c} is not in {{-1, 0, 1}}")));
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    /// Stricter checks for a record submitted by a human participant: a target choice,
    /// at least one criterion flagged 0/1, and a confidence rating.
    pub fn validate_human(&self) -> Result<(), Vec<FieldError>> {
        let mut errors = self.validate().err().unwrap_or_default();
        if self.choice.is_abstain() {
            errors.push(FieldError::new("choice", "must be T_A or T_B"));
        }
        if self.criteria.iter().any(|&c| c < 0) {
            errors.push(FieldError::new("criteria", "human criteria flags are 0 or 1"));
        } else if self.criteria.iter().all(|&c| c == 0) {
            errors.push(FieldError::new("criteria", "select at least one criterion"));
        }
        if self.confidence.is_none() {
            errors.push(FieldError::new("confidence", "required"));
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }
}
