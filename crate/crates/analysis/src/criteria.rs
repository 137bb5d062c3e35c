use std::collections::HashMap;

use graphsim_core::record::CRITERIA;
use graphsim_core::JudgmentRecord;
use serde::{Deserialize, Serialize};

/// When a model's contribution entry counts as selecting a criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    /// Only +1, a criterion that favoured the chosen target.
    #[default]
    Positive,
    /// Any nonzero entry.
    NonZero,
}

impl SelectionRule {
    pub fn selects(self, entry: i8) -> bool {
        match self {
            SelectionRule::Positive => entry == 1,
            SelectionRule::NonZero => entry != 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionTally {
    pub criterion: String,
    /// Paired trials on which the human selected the criterion.
    pub count: usize,
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

/// Per-criterion agreement between human selections and a model's contributions, over
/// trials both answered successfully.
pub fn criteria_alignment(human: &[JudgmentRecord], model: &[JudgmentRecord], rule: SelectionRule) -> Vec<CriterionTally> {
    let by_trial: HashMap<&str, &JudgmentRecord> = model.iter().filter(|r| r.is_ok()).map(|r| (r.trial_id.as_str(), r)).collect();
    let mut out: Vec<CriterionTally> =
        CRITERIA.iter().map(|c| CriterionTally { criterion: c.to_string(), count: 0, tp: 0, fn_: 0 }).collect();
    for h in human.iter().filter(|r| r.is_ok()) {
        let Some(m) = by_trial.get(h.trial_id.as_str()) else { continue };
        for (i, tally) in out.iter_mut().enumerate() {
            if h.criteria[i] != 1 {
                continue;
            }
            tally.count += 1;
            if rule.selects(m.criteria[i]) {
                tally.tp += 1;
            } else {
                tally.fn_ += 1;
            }
        }
    }
    out
}
