//! Graphlet orbit counts (2- to 4-node graphlets) and the GCD-11 distance.

use graphsim_core::Graph;

use crate::graphlets::{for_each_connected_subgraph, BitAdjacency};
use crate::stats::average_ranks;

pub const ORBITS: usize = 15;

/// The 11 non-redundant orbits used by GCD-11.
pub const GCD11_ORBITS: [usize; 11] = [0, 1, 2, 4, 5, 6, 7, 8, 9, 10, 11];

/// Per-node counts of the 15 orbits of connected graphlets on 2 to 4 nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitCounts {
    pub counts: Vec<[u64; ORBITS]>,
}

/// Orbit of each subgraph node from its induced degree and the graphlet's edge count.
pub fn orbit_of(size: usize, edges: usize, degree: usize, max_degree: usize) -> usize {
    match (size, edges) {
        (2, _) => 0,
        (3, 2) => {
            if degree == 1 {
                1
            } else {
                2
            }
        }
        (3, _) => 3,
        (4, 3) if max_degree == 3 => {
            if degree == 3 {
                7
            } else {
                6
            }
        }
        (4, 3) => {
            if degree == 1 {
                4
            } else {
                5
            }
        }
        (4, 4) if max_degree == 3 => match degree {
            1 => 9,
            2 => 10,
            _ => 11,
        },
        (4, 4) => 8,
        (4, 5) => {
            if degree == 2 {
                12
            } else {
                13
            }
        }
        (4, _) => 14,
        _ => unreachable!("graphlets have 2 to 4 nodes"),
    }
}

pub fn orbit_counts(g: &Graph) -> OrbitCounts {
    let mut counts = vec![[0u64; ORBITS]; g.node_count()];
    let adj = BitAdjacency::new(g);
    for_each_connected_subgraph(g, 4, |nodes| {
        let k = nodes.len();
        let mut deg = [0usize; 4];
        for i in 0..k {
            for j in i + 1..k {
                if adj.has_edge(nodes[i], nodes[j]) {
                    deg[i] += 1;
                    deg[j] += 1;
                }
            }
        }
        let edges = deg[..k].iter().sum::<usize>() / 2;
        let max_degree = deg[..k].iter().copied().max().unwrap_or(0);
        for i in 0..k {
            counts[nodes[i]][orbit_of(k, edges, deg[i], max_degree)] += 1;
        }
    });
    OrbitCounts { counts }
}

/// Spearman correlation matrix of the GCD-11 orbit columns, as the 55 upper-triangle
/// entries. Constant columns correlate 1 with each other and 0 with varying columns.
pub fn gcd11_signature(oc: &OrbitCounts) -> Vec<f64> {
    let columns: Vec<Vec<f64>> =
        GCD11_ORBITS.iter().map(|&o| average_ranks(&oc.counts.iter().map(|row| row[o] as f64).collect::<Vec<_>>())).collect();
    let centered: Vec<Option<Vec<f64>>> = columns
        .iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / c.len() as f64;
            let dev: Vec<f64> = c.iter().map(|x| x - mean).collect();
            let norm = dev.iter().map(|d| d * d).sum::<f64>().sqrt();
            (norm > 1e-12).then(|| dev.into_iter().map(|d| d / norm).collect())
        })
        .collect();
    let mut out = Vec::with_capacity(55);
    for i in 0..centered.len() {
        for j in i + 1..centered.len() {
            out.push(match (&centered[i], &centered[j]) {
                (Some(a), Some(b)) => a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().clamp(-1.0, 1.0),
                (None, None) => 1.0,
                _ => 0.0,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_orbits() {
        let oc = orbit_counts(&Graph::complete(3));
        for row in &oc.counts {
            assert_eq!(row[0], 2);
            assert_eq!(row[3], 1);
            assert_eq!(row[1] + row[2], 0);
        }
    }

    #[test]
    fn path4_orbits() {
        let oc = orbit_counts(&Graph::path(4));
        assert_eq!(oc.counts[0][4], 1);
        assert_eq!(oc.counts[1][5], 1);
        assert_eq!(oc.counts[0][1], 1);
        assert_eq!(oc.counts[1][2], 1);
        assert_eq!(oc.counts[1][1], 1);
    }

    #[test]
    fn star_center_differs_from_leaf() {
        let oc = orbit_counts(&Graph::star(5));
        assert_ne!(oc.counts[0], oc.counts[1]);
        assert_eq!(oc.counts[0][7], 4);
        assert_eq!(oc.counts[1][6], 3);
    }
}
