use std::collections::BTreeMap;

use graphsim_core::seed;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cluster::{Cell, ClusteredStimulus};
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    SameGroup,
    DistinctGroup,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::SameGroup => "same_group",
            Condition::DistinctGroup => "distinct_group",
        }
    }
}

/// Which target shares the query's cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InGroup {
    A,
    B,
    Both,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triplet {
    pub triplet_id: String,
    pub cell: Cell,
    pub query_id: String,
    pub target_a_id: String,
    pub target_b_id: String,
    pub condition: Condition,
    pub in_group_target: InGroup,
}

impl Triplet {
    pub fn ids(&self) -> [&str; 3] {
        [&self.query_id, &self.target_a_id, &self.target_b_id]
    }

    /// Checks the cluster constraints against the labels the triplet was drawn from.
    pub fn verify(&self, label_of: impl Fn(&str) -> Option<String>) -> Result<(), HarnessError> {
        let bad = |why: &str| HarnessError::InvalidTriplet(format!("{}: {why}", self.triplet_id));
        let [q, a, b] = self.ids();
        if q == a || q == b || a == b {
            return Err(bad("repeated stimulus"));
        }
        let label = |id: &str| label_of(id).ok_or_else(|| bad("unknown stimulus"));
        let (lq, la, lb) = (label(q)?, label(a)?, label(b)?);
        let actual = match (la == lq, lb == lq) {
            (true, true) => InGroup::Both,
            (true, false) => InGroup::A,
            (false, true) => InGroup::B,
            (false, false) => return Err(bad("no in-group target")),
        };
        let expected_condition = if actual == InGroup::Both { Condition::SameGroup } else { Condition::DistinctGroup };
        if actual != self.in_group_target || expected_condition != self.condition {
            return Err(bad("labels disagree with condition"));
        }
        Ok(())
    }
}

/// Draws one triplet without replacement from a single-cell pool.
pub fn make_triplet(triplet_id: &str, pool: &[ClusteredStimulus], condition: Condition, seed_value: u64) -> Result<Triplet, HarnessError> {
    let cell = pool.first().ok_or_else(|| HarnessError::PoolInsufficient(triplet_id.to_string()))?.cell;
    if pool.iter().any(|s| s.cell != cell) {
        return Err(HarnessError::MixedCell(triplet_id.to_string()));
    }
    let mut clusters: BTreeMap<&str, Vec<&ClusteredStimulus>> = BTreeMap::new();
    for s in pool {
        clusters.entry(&s.cluster_label).or_default().push(s);
    }
    let needed = match condition {
        Condition::SameGroup => 3,
        Condition::DistinctGroup => 2,
    };
    let eligible: Vec<&str> = clusters
        .iter()
        .filter(|(_, members)| members.len() >= needed)
        .filter(|_| condition == Condition::SameGroup || clusters.len() >= 2)
        .map(|(label, _)| *label)
        .collect();
    let mut rng = seed::rng(seed_value);
    let label = *eligible.choose(&mut rng).ok_or_else(|| HarnessError::PoolInsufficient(triplet_id.to_string()))?;
    let mut members = clusters[label].clone();
    members.shuffle(&mut rng);
    let (query, a, b, in_group) = match condition {
        Condition::SameGroup => (members[0], members[1], members[2], InGroup::Both),
        Condition::DistinctGroup => {
            let outsiders: Vec<&ClusteredStimulus> =
                clusters.iter().filter(|(l, _)| **l != label).flat_map(|(_, m)| m.iter().copied()).collect();
            let out = *outsiders.choose(&mut rng).expect("another cluster exists");
            if rng.random::<bool>() {
                (members[0], members[1], out, InGroup::A)
            } else {
                (members[0], out, members[1], InGroup::B)
            }
        }
    };
    Ok(Triplet {
        triplet_id: triplet_id.to_string(),
        cell,
        query_id: query.stimulus_id.clone(),
        target_a_id: a.stimulus_id.clone(),
        target_b_id: b.stimulus_id.clone(),
        condition,
        in_group_target: in_group,
    })
}

/// Left/right screen placement of the two targets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub left_id: String,
    pub right_id: String,
}

impl Placement {
    pub fn a_on_left(&self, t: &Triplet) -> bool {
        self.left_id == t.target_a_id
    }
}

/// Fair coin keyed by the triplet id and seed.
pub fn randomize_placement(t: &Triplet, seed_value: u64) -> Placement {
    let mut rng = seed::rng(seed::derive(seed_value, &t.triplet_id));
    let (a, b) = (t.target_a_id.clone(), t.target_b_id.clone());
    if rng.random::<bool>() {
        Placement { left_id: a, right_id: b }
    } else {
        Placement { left_id: b, right_id: a }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::SourceType;
    use graphsim_core::{DensityBin, LayoutKind, SizeBin};

    fn pool(labels: &[&str]) -> Vec<ClusteredStimulus> {
        let cell = Cell { source: SourceType::Synthetic, size: SizeBin::Small, density: DensityBin::Sparse, layout: LayoutKind::Circular };
        labels
            .iter()
            .enumerate()
            .map(|(i, l)| ClusteredStimulus { stimulus_id: format!("s{i}"), cluster_label: l.to_string(), cell })
            .collect()
    }

    #[test]
    fn same_group_from_single_cluster() {
        let p = pool(&["X"; 6]);
        let t = make_triplet("t", &p, Condition::SameGroup, 1).unwrap();
        let mut ids = t.ids().to_vec();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 3);
        assert_eq!(t.in_group_target, InGroup::Both);
    }

    #[test]
    fn insufficient_pools() {
        assert!(matches!(make_triplet("t", &pool(&["X", "X", "Y"]), Condition::SameGroup, 0), Err(HarnessError::PoolInsufficient(_))));
        assert!(matches!(make_triplet("t", &pool(&["X", "X", "X"]), Condition::DistinctGroup, 0), Err(HarnessError::PoolInsufficient(_))));
        assert!(make_triplet("t", &pool(&["X", "X", "Y"]), Condition::DistinctGroup, 0).is_ok());
    }

    #[test]
    fn placement_is_stable_and_keeps_labels() {
        let t = make_triplet("t9", &pool(&["X", "X", "Y", "Y"]), Condition::DistinctGroup, 3).unwrap();
        let before = t.clone();
        assert_eq!(randomize_placement(&t, 5), randomize_placement(&t, 5));
        let _ = randomize_placement(&t, 6);
        assert_eq!(t, before);
    }
}
