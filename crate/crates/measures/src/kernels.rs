//! Shortest-path and Weisfeiler-Lehman subtree kernels, cosine normalized.

use std::collections::{BTreeMap, HashMap};

use graphsim_core::graph::DistanceMatrix;
use graphsim_core::Graph;

pub const DEFAULT_WL_ITERATIONS: usize = 5;

fn cosine(k12: f64, k11: f64, k22: f64) -> f64 {
    if k11 == 0.0 || k22 == 0.0 {
        return if k11 == k22 { 1.0 } else { 0.0 };
    }
    (k12 / (k11 * k22).sqrt()).clamp(0.0, 1.0)
}

fn dot<K: Ord>(a: &BTreeMap<K, u64>, b: &BTreeMap<K, u64>) -> f64 {
    a.iter().filter_map(|(k, &x)| b.get(k).map(|&y| x as f64 * y as f64)).sum()
}

/// Histogram of shortest-path lengths over unordered node pairs.
pub fn sp_histogram(d: &DistanceMatrix) -> BTreeMap<u32, u64> {
    let mut h = BTreeMap::new();
    for u in 0..d.len() {
        for &x in &d.row(u)[u + 1..] {
            *h.entry(x).or_insert(0) += 1;
        }
    }
    h
}

pub fn sp_kernel_from_histograms(h1: &BTreeMap<u32, u64>, h2: &BTreeMap<u32, u64>) -> f64 {
    cosine(dot(h1, h2), dot(h1, h1), dot(h2, h2))
}

pub fn sp_kernel(g1: &Graph, g2: &Graph) -> f64 {
    sp_kernel_from_histograms(&sp_histogram(&g1.all_pairs_distances()), &sp_histogram(&g2.all_pairs_distances()))
}

/// Label-count feature maps of both graphs over WL rounds `0..=h`, with labels
/// compressed through one dictionary shared by the pair.
pub fn wl_features(g1: &Graph, g2: &Graph, h: usize) -> [BTreeMap<(usize, u32), u64>; 2] {
    let graphs = [g1, g2];
    let mut labels: [Vec<u32>; 2] = [vec![0; g1.node_count()], vec![0; g2.node_count()]];
    let mut features: [BTreeMap<(usize, u32), u64>; 2] = Default::default();
    for round in 0..=h {
        if round > 0 {
            let mut dict: HashMap<(u32, Vec<u32>), u32> = HashMap::new();
            let mut next: [Vec<u32>; 2] = Default::default();
            let mut sigs: [Vec<(u32, Vec<u32>)>; 2] = Default::default();
            for (i, g) in graphs.iter().enumerate() {
                sigs[i] = (0..g.node_count())
                    .map(|u| {
                        let mut nb: Vec<u32> = g.neighbors(u).iter().map(|&v| labels[i][v]).collect();
                        nb.sort_unstable();
                        (labels[i][u], nb)
                    })
                    .collect();
            }
            let mut distinct: Vec<&(u32, Vec<u32>)> = sigs.iter().flatten().collect();
            distinct.sort();
            distinct.dedup();
            for s in distinct {
                let id = dict.len() as u32;
                dict.insert(s.clone(), id);
            }
            for i in 0..2 {
                next[i] = sigs[i].iter().map(|s| dict[s]).collect();
            }
            labels = next;
        }
        for i in 0..2 {
            for &l in &labels[i] {
                *features[i].entry((round, l)).or_insert(0) += 1;
            }
        }
    }
    features
}

pub fn wl_kernel(g1: &Graph, g2: &Graph, h: usize) -> f64 {
    let [f1, f2] = wl_features(g1, g2, h);
    cosine(dot(&f1, &f2), dot(&f1, &f1), dot(&f2, &f2))
}
