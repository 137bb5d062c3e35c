//! Network portraits and portrait divergence.

use std::collections::BTreeMap;

use graphsim_core::graph::DistanceMatrix;
use graphsim_core::Graph;

/// `b[l][k]` = number of nodes with exactly `k` nodes at distance `l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Portrait {
    pub b: Vec<Vec<usize>>,
}

impl Portrait {
    pub fn get(&self, l: usize, k: usize) -> usize {
        self.b.get(l).and_then(|row| row.get(k)).copied().unwrap_or(0)
    }

    /// Joint (distance, shell size) distribution with mass `k * B[l][k]`, i.e. the
    /// probability that a random pair (u, v) has v at distance l and u has k such nodes.
    pub fn distribution(&self) -> BTreeMap<(usize, usize), f64> {
        let total: f64 = self.b.iter().flat_map(|row| row.iter().enumerate().map(|(k, &c)| (k * c) as f64)).sum();
        let mut out = BTreeMap::new();
        for (l, row) in self.b.iter().enumerate() {
            for (k, &c) in row.iter().enumerate() {
                if k > 0 && c > 0 {
                    out.insert((l, k), (k * c) as f64 / total);
                }
            }
        }
        out
    }
}

pub fn node_portrait(g: &Graph) -> Portrait {
    portrait_from_distances(&g.all_pairs_distances())
}

pub fn portrait_from_distances(d: &DistanceMatrix) -> Portrait {
    let n = d.len();
    let diameter = d.diameter() as usize;
    let mut b = vec![vec![0usize; n + 1]; diameter + 1];
    let mut shell = vec![0usize; diameter + 1];
    for u in 0..n {
        shell.iter_mut().for_each(|s| *s = 0);
        for &x in d.row(u) {
            shell[x as usize] += 1;
        }
        for (l, &k) in shell.iter().enumerate() {
            b[l][k] += 1;
        }
    }
    Portrait { b }
}

/// Base-2 Jensen-Shannon divergence between two sparse distributions; lies in [0, 1].
pub fn js_divergence<K: Ord + Copy>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> f64 {
    let mut keys: Vec<K> = p.keys().chain(q.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    let mut js = 0.0;
    for k in keys {
        let a = p.get(&k).copied().unwrap_or(0.0);
        let b = q.get(&k).copied().unwrap_or(0.0);
        let m = 0.5 * (a + b);
        if a > 0.0 {
            js += 0.5 * a * (a / m).log2();
        }
        if b > 0.0 {
            js += 0.5 * b * (b / m).log2();
        }
    }
    js.clamp(0.0, 1.0)
}

pub fn portrait_divergence_raw(p1: &Portrait, p2: &Portrait) -> f64 {
    js_divergence(&p1.distribution(), &p2.distribution())
}
