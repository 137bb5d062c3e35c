use graphsim_core::seed;
use graphsim_core::Graph;
use graphsim_measures::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

const TOL: f64 = 1e-6;

fn random_connected(n: usize, extra: f64, seed_value: u64) -> Graph {
    let mut rng = seed::rng(seed_value);
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.random_range(0..v), v)).collect();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < extra {
                edges.push((u, v));
            }
        }
    }
    Graph::new_dedup(n, edges).expect("connected")
}

fn shuffled(g: &Graph, seed_value: u64) -> Graph {
    let mut perm: Vec<usize> = (0..g.node_count()).collect();
    perm.shuffle(&mut seed::rng(seed_value));
    g.permuted(&perm)
}

#[test]
fn all_measures_on_a_fixed_pair() {
    let (g1, g2) = (Graph::cycle(8), random_connected(9, 0.3, 5));
    for m in MeasureId::ALL {
        let s = pairwise_similarity(m, &g1, &g2, 1).unwrap();
        assert!((0.0..=1.0).contains(&s.similarity), "{m}: {}", s.similarity);
        assert_eq!(s.measure, m);
    }
}

#[test]
fn portrait_self_similarity() {
    let g = random_connected(12, 0.2, 8);
    assert_eq!(pairwise_similarity(MeasureId::PortraitDivergence, &g, &g, 0).unwrap().similarity, 1.0);
}

#[test]
fn score_export_and_parallel_order() {
    let contexts: std::collections::HashMap<String, GraphContext> = [("a", 6), ("b", 7), ("c", 9)]
        .into_iter()
        .map(|(id, n)| (id.to_string(), GraphContext::with_id(id, random_connected(n, 0.3, n as u64))))
        .collect();
    let pairs = vec![("a".to_string(), "b".to_string()), ("b".to_string(), "c".to_string())];
    let scores = score_pairs(&contexts, &pairs, &MeasureId::ALL, &MeasureConfig::with_seed(2)).unwrap();
    assert_eq!(scores.len(), 32);
    assert_eq!(scores[16].pair, ("b".to_string(), "c".to_string()));
    assert_eq!(scores[17].measure, MeasureId::ALL[1]);
    let mut out = Vec::new();
    write_scores_tsv(&mut out, &scores).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().next(), Some("measure\tgraph_a\tgraph_b\traw\tsimilarity"));
    assert_eq!(text.lines().count(), 33);
    let missing = vec![("a".to_string(), "zzz".to_string())];
    assert!(score_pairs(&contexts, &missing, &[MeasureId::SizeBalance], &MeasureConfig::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn contract_holds(
        n1 in 5usize..24, n2 in 5usize..24,
        e1 in 0.0f64..0.4, e2 in 0.0f64..0.4,
        s1: u64, s2: u64, perm_seed: u64, measure_seed in 0u64..1000,
    ) {
        let g1 = random_connected(n1, e1, s1);
        let g2 = random_connected(n2, e2, s2);
        let g1p = shuffled(&g1, perm_seed);
        let cfg = MeasureConfig::with_seed(measure_seed);
        let (c1, c2, c1p) = (GraphContext::new(g1), GraphContext::new(g2), GraphContext::new(g1p));
        for m in MeasureId::ALL {
            let ab = score(m, &c1, &c2, &cfg).unwrap().similarity;
            let ba = score(m, &c2, &c1, &cfg).unwrap().similarity;
            let pb = score(m, &c1p, &c2, &cfg).unwrap().similarity;
            let aa = score(m, &c1, &c1, &cfg).unwrap().similarity;
            let ap = score(m, &c1, &c1p, &cfg).unwrap().similarity;
            prop_assert!((0.0..=1.0).contains(&ab), "{m}: {ab}");
            prop_assert!((ab - ba).abs() < TOL, "{m} symmetry: {ab} vs {ba}");
            prop_assert!((ab - pb).abs() < TOL, "{m} relabel: {ab} vs {pb}");
            prop_assert!((aa - 1.0).abs() < TOL, "{m} identity: {aa}");
            prop_assert!((ap - 1.0).abs() < TOL, "{m} relabelled identity: {ap}");
        }
    }
}
