use std::collections::HashMap;

use graphsim_core::catalog::{Catalog, CatalogEntry};
use graphsim_core::{GeneratorKind, SourceKind};
use graphsim_harness::*;
use proptest::prelude::*;

fn entry(id: &str, source: SourceKind, cell: Cell) -> CatalogEntry {
    CatalogEntry {
        stimulus_id: id.to_string(),
        source,
        size_bin: cell.size,
        density_bin: cell.density,
        layout: cell.layout,
        seed: 0,
        node_count: 10,
        edge_count: 12,
        cluster_label: None,
        params: None,
    }
}

/// Three synthetic replicates per generator and three real snapshots per group in every
/// reachable cell.
fn fixture() -> (Catalog, LabelManifest) {
    let mut catalog = Catalog::default();
    let mut labels = LabelManifest::new();
    for cell in Cell::reachable() {
        match cell.source {
            SourceType::Synthetic => {
                for g in GeneratorKind::ALL {
                    for rep in 0..3 {
                        let id = format!("{}-{cell}-{rep}", g.as_str());
                        catalog.stimuli.push(entry(&id, SourceKind::Synthetic { generator: g }, cell));
                    }
                }
            }
            SourceType::Real => {
                for group in ["A", "B"] {
                    for rep in 0..3 {
                        let id = format!("real-{group}-{cell}-{rep}");
                        let source = SourceKind::Real { dataset_id: "dataset3".into(), window: format!("w{rep}") };
                        catalog.stimuli.push(entry(&id, source, cell));
                        labels.insert(id, format!("dataset3-group{group}"));
                    }
                }
            }
        }
    }
    (catalog, labels)
}

#[test]
fn cluster_labels() {
    let (catalog, labels) = fixture();
    let clustered = assign_clusters(&catalog, &labels).unwrap();
    let bba = clustered.iter().find(|s| s.stimulus_id.starts_with("BBA-")).unwrap();
    assert_eq!(bba.cluster_label, "BBA");
    let real = clustered.iter().find(|s| s.stimulus_id.starts_with("real-B-")).unwrap();
    assert_eq!(real.cluster_label, "dataset3-groupB");

    let mut missing = labels.clone();
    missing.remove(&real.stimulus_id);
    assert!(matches!(assign_clusters(&catalog, &missing), Err(HarnessError::MissingLabel(id)) if id == real.stimulus_id));
}

#[test]
fn session_covers_every_reachable_cell() {
    let (catalog, labels) = fixture();
    let stimuli = assign_clusters(&catalog, &labels).unwrap();
    let s0 = build_session(&stimuli, "p01", 42, 0).unwrap();
    assert_eq!(s0.trials.len(), 69);
    s0.validate().unwrap();
    let label: HashMap<&str, &str> = stimuli.iter().map(|s| (s.stimulus_id.as_str(), s.cluster_label.as_str())).collect();
    for t in &s0.trials {
        t.triplet.verify(|id| label.get(id).map(|l| l.to_string())).unwrap();
    }
    let same = s0.trials.iter().filter(|t| t.triplet.condition == Condition::SameGroup).count();
    assert!(same == 34 || same == 35, "{same}");

    let s1 = build_session(&stimuli, "p01", 42, 1).unwrap();
    assert_eq!(s0.cells(), s1.cells());
    let order = |s: &Session| s.trials.iter().map(|t| t.triplet.cell).collect::<Vec<_>>();
    assert_ne!(order(&s0), order(&s1));
    assert_eq!(s0, build_session(&stimuli, "p01", 42, 0).unwrap());
}

#[test]
fn coverage_gap_is_reported() {
    let (mut catalog, labels) = fixture();
    let gap = Cell::reachable()[5];
    catalog.stimuli.retain(|e| !(e.size_bin == gap.size && e.density_bin == gap.density && e.layout == gap.layout && !e.source.is_real()));
    let stimuli = assign_clusters(&catalog, &labels).unwrap();
    assert!(matches!(build_session(&stimuli, "p", 1, 0), Err(HarnessError::CoverageGap(k)) if k == gap.key()));
}

#[test]
fn session_file_round_trip() {
    let (catalog, labels) = fixture();
    let stimuli = assign_clusters(&catalog, &labels).unwrap();
    let s = build_session(&stimuli, "p07", 3, 6).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p07.json");
    s.save(&path).unwrap();
    assert_eq!(Session::load(&path).unwrap(), s);
}

#[test]
fn placement_is_balanced() {
    let (catalog, labels) = fixture();
    let stimuli = assign_clusters(&catalog, &labels).unwrap();
    let pool: Vec<ClusteredStimulus> = pools(&stimuli).into_values().next().unwrap();
    let mut left_a = 0;
    for i in 0..1000u64 {
        let t = make_triplet(&format!("t{i}"), &pool, Condition::DistinctGroup, i).unwrap();
        let p = randomize_placement(&t, 99);
        if p.a_on_left(&t) {
            left_a += 1;
        }
    }
    let freq = left_a as f64 / 1000.0;
    assert!((0.45..=0.55).contains(&freq), "{freq}");
}

fn arb_pool() -> impl Strategy<Value = Vec<ClusteredStimulus>> {
    let cell = Cell::reachable()[0];
    proptest::collection::vec(0u8..4, 3..14).prop_map(move |labels| {
        labels
            .into_iter()
            .enumerate()
            .map(|(i, l)| ClusteredStimulus { stimulus_id: format!("s{i}"), cluster_label: format!("c{l}"), cell })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn triplets_satisfy_cluster_constraints(pool in arb_pool(), distinct: bool, seed: u64) {
        let condition = if distinct { Condition::DistinctGroup } else { Condition::SameGroup };
        let label: HashMap<String, String> = pool.iter().map(|s| (s.stimulus_id.clone(), s.cluster_label.clone())).collect();
        match make_triplet("t", &pool, condition, seed) {
            Ok(t) => {
                prop_assert_eq!(t.condition, condition);
                prop_assert!(t.verify(|id| label.get(id).cloned()).is_ok());
                let q = &label[&t.query_id];
                let out = [&t.target_a_id, &t.target_b_id].iter().filter(|id| &label[**id] != q).count();
                prop_assert_eq!(out, if distinct { 1 } else { 0 });
                prop_assert_eq!(make_triplet("t", &pool, condition, seed).unwrap(), t);
            }
            Err(HarnessError::PoolInsufficient(_)) => {
                let mut counts: HashMap<&str, usize> = HashMap::new();
                for s in &pool { *counts.entry(&s.cluster_label).or_default() += 1; }
                let feasible = if distinct {
                    counts.len() >= 2 && counts.values().any(|&c| c >= 2)
                } else {
                    counts.values().any(|&c| c >= 3)
                };
                prop_assert!(!feasible);
            }
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}

#[test]
fn session_over_synthetic_cells_only() {
    let (mut catalog, labels) = fixture();
    catalog.stimuli.retain(|e| !e.source.is_real());
    let stimuli = assign_clusters(&catalog, &labels).unwrap();
    assert!(build_session(&stimuli, "p", 1, 0).is_err());
    let cells: Vec<Cell> = Cell::reachable().into_iter().filter(|c| c.source == SourceType::Synthetic).collect();
    let s = build_session_over(&stimuli, &cells, "p", 1, 2).unwrap();
    assert_eq!(s.trials.len(), 36);
    s.validate_over(&cells).unwrap();
    assert!(s.validate().is_err());
}
