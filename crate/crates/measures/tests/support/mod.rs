//! Brute-force reference implementations shared by the oracle suites.
#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use graphsim_core::seed;
use graphsim_core::Graph;
use rand::seq::SliceRandom;
use rand::Rng;

/// Random connected graph: a random recursive tree plus extra edges, randomly relabelled.
pub fn random_connected(n: usize, extra: f64, rng: &mut seed::Rng) -> Graph {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.random_range(0..v), v)).collect();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < extra {
                edges.push((u, v));
            }
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let edges: Vec<(usize, usize)> = edges.into_iter().map(|(a, b)| (perm[a], perm[b])).collect();
    Graph::new_dedup(n, edges).expect("tree plus edges is connected")
}

pub fn adjacency(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut a = vec![vec![false; n]; n];
    for (u, v) in g.edges() {
        a[u][v] = true;
        a[v][u] = true;
    }
    a
}

pub fn subset_connected(a: &[Vec<bool>], nodes: &[usize]) -> bool {
    let mut seen = vec![false; nodes.len()];
    seen[0] = true;
    let mut stack = vec![0];
    while let Some(i) = stack.pop() {
        for j in 0..nodes.len() {
            if !seen[j] && a[nodes[i]][nodes[j]] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.iter().all(|&s| s)
}

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n).filter(|m| m.count_ones() as usize == k).map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect()).collect()
}

/// Orbit counts by enumerating every node subset and classifying the induced graph
/// by its sorted degree sequence.
pub fn orbit_oracle(g: &Graph) -> Vec<[u64; 15]> {
    let n = g.node_count();
    let a = adjacency(g);
    let mut counts = vec![[0u64; 15]; n];
    for k in 2..=4 {
        for s in subsets(n, k) {
            if !subset_connected(&a, &s) {
                continue;
            }
            let deg: Vec<usize> = s.iter().map(|&u| s.iter().filter(|&&v| a[u][v]).count()).collect();
            let mut seq = deg.clone();
            seq.sort_unstable();
            for (i, &u) in s.iter().enumerate() {
                let d = deg[i];
                let orbit = match (k, seq.as_slice()) {
                    (2, _) => 0,
                    (3, [1, 1, 2]) => [0, 1, 2][d],
                    (3, [2, 2, 2]) => 3,
                    (4, [1, 1, 2, 2]) => [0, 4, 5][d],
                    (4, [1, 1, 1, 3]) => {
                        if d == 3 {
                            7
                        } else {
                            6
                        }
                    }
                    (4, [2, 2, 2, 2]) => 8,
                    (4, [1, 2, 2, 3]) => [0, 9, 10, 11][d],
                    (4, [2, 2, 3, 3]) => {
                        if d == 2 {
                            12
                        } else {
                            13
                        }
                    }
                    (4, [3, 3, 3, 3]) => 14,
                    other => panic!("unexpected graphlet {other:?}"),
                };
                counts[u][orbit] += 1;
            }
        }
    }
    counts
}

pub fn bfs_shells(g: &Graph, s: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.node_count()];
    dist[s] = 0;
    let mut queue = VecDeque::from([s]);
    let mut shells = vec![0usize];
    while let Some(u) = queue.pop_front() {
        if shells.len() <= dist[u] {
            shells.resize(dist[u] + 1, 0);
        }
        shells[dist[u]] += 1;
        for &v in g.neighbors(u) {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    shells
}

pub fn portrait_oracle(g: &Graph) -> HashMap<(usize, usize), usize> {
    let shells: Vec<Vec<usize>> = (0..g.node_count()).map(|s| bfs_shells(g, s)).collect();
    let depth = shells.iter().map(Vec::len).max().unwrap_or(0);
    let mut b = HashMap::new();
    for sh in &shells {
        for l in 0..depth {
            *b.entry((l, sh.get(l).copied().unwrap_or(0))).or_insert(0) += 1;
        }
    }
    b
}

/// WL feature map with labels as explicit nested strings.
pub fn wl_oracle_features(g: &Graph, h: usize) -> HashMap<(usize, String), u64> {
    let n = g.node_count();
    let mut labels = vec!["0".to_string(); n];
    let mut out = HashMap::new();
    for round in 0..=h {
        if round > 0 {
            labels = (0..n)
                .map(|u| {
                    let mut nb: Vec<&str> = g.neighbors(u).iter().map(|&v| labels[v].as_str()).collect();
                    nb.sort_unstable();
                    format!("{}[{}]", labels[u], nb.join(","))
                })
                .collect();
        }
        for l in &labels {
            *out.entry((round, l.clone())).or_insert(0) += 1;
        }
    }
    out
}

pub fn wl_oracle(g1: &Graph, g2: &Graph, h: usize) -> f64 {
    let (f1, f2) = (wl_oracle_features(g1, h), wl_oracle_features(g2, h));
    let dot = |a: &HashMap<(usize, String), u64>, b: &HashMap<(usize, String), u64>| -> f64 {
        a.iter().filter_map(|(k, &x)| b.get(k).map(|&y| (x * y) as f64)).sum()
    };
    dot(&f1, &f2) / (dot(&f1, &f1) * dot(&f2, &f2)).sqrt()
}
