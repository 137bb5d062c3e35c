use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use graphsim_core::seed;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cluster::{pools, Cell, ClusteredStimulus};
use crate::triplet::{make_triplet, randomize_placement, Condition, Placement, Triplet};
use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trial {
    pub position: usize,
    pub trial_id: String,
    pub triplet: Triplet,
    pub placement: Placement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub seed: u64,
    pub latin_row: usize,
    pub trials: Vec<Trial>,
}

/// Row `row` of the cyclic Latin square of order `n`.
pub fn latin_row(n: usize, row: usize) -> Vec<usize> {
    (0..n).map(|col| (row + col) % n).collect()
}

/// Conditions for cells in canonical order: each consecutive pair gets one of each
/// in seeded order; an odd last cell gets a seeded coin.
pub fn balanced_conditions(n: usize, seed_value: u64) -> Vec<Condition> {
    let mut rng = seed::rng(seed::derive(seed_value, "conditions"));
    let mut out = Vec::with_capacity(n);
    while out.len() + 1 < n {
        if rng.random::<bool>() {
            out.extend([Condition::SameGroup, Condition::DistinctGroup]);
        } else {
            out.extend([Condition::DistinctGroup, Condition::SameGroup]);
        }
    }
    if out.len() < n {
        out.push(if rng.random::<bool>() { Condition::SameGroup } else { Condition::DistinctGroup });
    }
    out
}

fn other(c: Condition) -> Condition {
    match c {
        Condition::SameGroup => Condition::DistinctGroup,
        Condition::DistinctGroup => Condition::SameGroup,
    }
}

/// One triplet per reachable cell, ordered by a Latin-square row. A cell whose pool
/// cannot serve its assigned condition falls back to the other one.
pub fn build_session(stimuli: &[ClusteredStimulus], session_id: &str, seed_value: u64, row: usize) -> Result<Session, HarnessError> {
    build_session_over(stimuli, &Cell::reachable(), session_id, seed_value, row)
}

/// [`build_session`] restricted to `cells`, given in canonical order.
pub fn build_session_over(
    stimuli: &[ClusteredStimulus],
    cells: &[Cell],
    session_id: &str,
    seed_value: u64,
    row: usize,
) -> Result<Session, HarnessError> {
    let by_cell = pools(stimuli);
    let conditions = balanced_conditions(cells.len(), seed_value);
    let triplets = cells
        .iter()
        .zip(&conditions)
        .map(|(cell, &condition)| {
            let pool = by_cell.get(cell).ok_or_else(|| HarnessError::CoverageGap(cell.key()))?;
            let id = format!("{session_id}.{}", cell.slug());
            let tseed = seed::derive(seed_value, &cell.key());
            make_triplet(&id, pool, condition, tseed)
                .or_else(|_| make_triplet(&id, pool, other(condition), tseed))
                .map_err(|_| HarnessError::CoverageGap(cell.key()))
        })
        .collect::<Result<Vec<Triplet>, HarnessError>>()?;
    let placement_seed = seed::derive(seed_value, "placement");
    let trials = latin_row(cells.len(), row)
        .into_iter()
        .enumerate()
        .map(|(position, idx)| {
            let triplet = triplets[idx].clone();
            Trial {
                position,
                trial_id: format!("{session_id}-{position:02}"),
                placement: randomize_placement(&triplet, placement_seed),
                triplet,
            }
        })
        .collect();
    Ok(Session { session_id: session_id.to_string(), seed: seed_value, latin_row: row, trials })
}

impl Session {
    pub fn cells(&self) -> BTreeSet<Cell> {
        self.trials.iter().map(|t| t.triplet.cell).collect()
    }

    pub fn trial(&self, trial_id: &str) -> Option<&Trial> {
        self.trials.iter().find(|t| t.trial_id == trial_id)
    }

    /// Structural checks: unique trial ids, one trial per reachable cell, placements
    /// that show exactly the two targets.
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.validate_over(&Cell::reachable())
    }

    /// [`Session::validate`] against an explicit cell set.
    pub fn validate_over(&self, cells: &[Cell]) -> Result<(), HarnessError> {
        let bad = |why: String| HarnessError::InvalidSession(format!("{}: {why}", self.session_id));
        let ids: HashSet<&str> = self.trials.iter().map(|t| t.trial_id.as_str()).collect();
        if ids.len() != self.trials.len() {
            return Err(bad("duplicate trial ids".into()));
        }
        let expected: BTreeSet<Cell> = cells.iter().copied().collect();
        if self.cells() != expected || self.trials.len() != expected.len() {
            return Err(bad(format!("{} trials over {} cells", self.trials.len(), self.cells().len())));
        }
        for t in &self.trials {
            let mut shown = [t.placement.left_id.as_str(), t.placement.right_id.as_str()];
            let mut targets = [t.triplet.target_a_id.as_str(), t.triplet.target_b_id.as_str()];
            shown.sort();
            targets.sort();
            if shown != targets {
                return Err(bad(format!("{} shows the wrong targets", t.trial_id)));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("session serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), HarnessError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Session::from_json(&std::fs::read_to_string(path)?)
    }
}
