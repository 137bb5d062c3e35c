//! NetSimile: aggregated local node features compared with the Canberra distance.

use graphsim_core::Graph;

use crate::stats::{kurtosis, mean, median, skewness, std_dev};

pub const NODE_FEATURES: usize = 7;
pub const AGGREGATES: usize = 5;

/// Number of triangles through each node.
pub fn node_triangles(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    let mut tri = vec![0usize; n];
    for u in 0..n {
        for &v in g.neighbors(u).iter().filter(|&&v| v > u) {
            let common = common_above(g.neighbors(u), g.neighbors(v), v);
            // Each triangle u < v < w is found once from its smallest edge (u, v).
            tri[u] += common.len();
            tri[v] += common.len();
            for w in common {
                tri[w] += 1;
            }
        }
    }
    tri
}

/// Common neighbours of two sorted lists that are greater than `floor`.
fn common_above(a: &[usize], b: &[usize], floor: usize) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                if a[i] > floor {
                    out.push(a[i]);
                }
                i += 1;
                j += 1;
            }
        }
    }
    out
}

pub fn clustering(g: &Graph) -> Vec<f64> {
    node_triangles(g)
        .into_iter()
        .enumerate()
        .map(|(u, t)| {
            let d = g.degree(u) as f64;
            if d < 2.0 {
                0.0
            } else {
                2.0 * t as f64 / (d * (d - 1.0))
            }
        })
        .collect()
}

/// The seven per-node features, one vector per feature.
pub fn node_features(g: &Graph) -> [Vec<f64>; NODE_FEATURES] {
    let n = g.node_count();
    let deg: Vec<f64> = (0..n).map(|u| g.degree(u) as f64).collect();
    let cc = clustering(g);
    let tri = node_triangles(g);
    let mut f: [Vec<f64>; NODE_FEATURES] = Default::default();
    // Per-node stamps (u + 1) avoid clearing between ego nets.
    let mut in_ego = vec![0usize; n];
    let mut in_frontier = vec![0usize; n];
    for u in 0..n {
        let nb = g.neighbors(u);
        let k = nb.len().max(1) as f64;
        f[0].push(deg[u]);
        f[1].push(cc[u]);
        f[2].push(nb.iter().map(|&v| deg[v]).sum::<f64>() / k);
        f[3].push(nb.iter().map(|&v| cc[v]).sum::<f64>() / k);
        // Ego net = u plus neighbours; inner edges = star edges + triangles at u.
        f[4].push((nb.len() + tri[u]) as f64);
        let stamp = u + 1;
        in_ego[u] = stamp;
        for &v in nb {
            in_ego[v] = stamp;
        }
        let mut outgoing = 0usize;
        let mut frontier = 0usize;
        for &v in nb {
            for &w in g.neighbors(v) {
                if in_ego[w] != stamp {
                    outgoing += 1;
                    if in_frontier[w] != stamp {
                        in_frontier[w] = stamp;
                        frontier += 1;
                    }
                }
            }
        }
        f[5].push(outgoing as f64);
        f[6].push(frontier as f64);
    }
    f
}

/// 35-dimensional signature: median, mean, std, skewness and kurtosis per feature.
pub fn netsimile_signature(g: &Graph) -> Vec<f64> {
    node_features(g).iter().flat_map(|x| [median(x), mean(x), std_dev(x), skewness(x), kurtosis(x)]).collect()
}

/// Canberra distance; coordinates where both entries are zero contribute nothing.
pub fn canberra(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let den = x.abs() + y.abs();
            if den == 0.0 {
                0.0
            } else {
                (x - y).abs() / den
            }
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangles_and_clustering() {
        let g = Graph::complete(4);
        assert_eq!(node_triangles(&g), vec![3; 4]);
        assert_eq!(clustering(&g), vec![1.0; 4]);
        assert_eq!(node_triangles(&Graph::cycle(5)), vec![0; 5]);
    }

    #[test]
    fn ego_features_on_path() {
        let f = node_features(&Graph::path(4));
        // Node 1: ego {0,1,2}, 2 inner edges, 1 outgoing edge (2-3), 1 frontier node.
        assert_eq!((f[4][1], f[5][1], f[6][1]), (2.0, 1.0, 1.0));
        assert_eq!((f[4][0], f[5][0], f[6][0]), (1.0, 1.0, 1.0));
    }

    #[test]
    fn canberra_basics() {
        assert_eq!(canberra(&[0.0, 1.0], &[0.0, 1.0]), 0.0);
        assert_eq!(canberra(&[1.0, 0.0], &[0.0, 2.0]), 2.0);
    }
}
