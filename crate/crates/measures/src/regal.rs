//! REGAL: xNetMF structural node embeddings learned jointly for both graphs.

use graphsim_core::{seed, Graph};
use nalgebra::DMatrix;
use rand::seq::index::sample;

use crate::alignment::{pinv, symmetric_best_match};

/// Neighbourhood radius of the degree features.
pub const HOPS: usize = 2;
/// Discount applied to each further hop.
pub const HOP_DISCOUNT: f64 = 0.01;
/// Landmark count factor: `p = min(n, LANDMARK_FACTOR * log2 n)`.
pub const LANDMARK_FACTOR: f64 = 10.0;

fn log2_bin(degree: usize) -> usize {
    (usize::BITS - 1 - degree.max(1).leading_zeros()) as usize
}

/// Discounted log-binned degree counts of the nodes at each hop `1..=HOPS`.
pub fn degree_features(g: &Graph, bins: usize) -> Vec<Vec<f64>> {
    (0..g.node_count())
        .map(|u| {
            let dist = g.bfs_distances(u);
            let mut counts = vec![[0u32; HOPS]; bins];
            for (v, &d) in dist.iter().enumerate() {
                let d = d as usize;
                if (1..=HOPS).contains(&d) {
                    counts[log2_bin(g.degree(v))][d - 1] += 1;
                }
            }
            counts.iter().map(|c| c.iter().enumerate().map(|(h, &x)| HOP_DISCOUNT.powi(h as i32) * x as f64).sum()).collect()
        })
        .collect()
}

pub fn landmark_count(total_nodes: usize) -> usize {
    let n = total_nodes as f64;
    ((LANDMARK_FACTOR * n.log2()).floor() as usize).clamp(1, total_nodes.max(1))
}

fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
}

/// Joint embeddings: rows `0..n1` belong to `g1`, the rest to `g2`.
pub fn regal_embeddings(g1: &Graph, g2: &Graph, seed_value: u64) -> (DMatrix<f64>, DMatrix<f64>) {
    let max_degree = g1.max_degree().max(g2.max_degree());
    let bins = log2_bin(max_degree) + 1;
    let mut features = degree_features(g1, bins);
    let n1 = features.len();
    features.extend(degree_features(g2, bins));
    let total = features.len();

    // Landmarks are sampled by position in feature order.
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&a, &b| lexicographic(&features[a], &features[b]));
    let p = landmark_count(total);
    let mut rng = seed::rng(seed::derive(seed_value, "regal"));
    let mut positions = sample(&mut rng, total, p).into_vec();
    positions.sort_unstable();
    let landmarks: Vec<usize> = positions.iter().map(|&i| order[i]).collect();

    let sim = |a: &[f64], b: &[f64]| (-a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>()).exp();
    let c = DMatrix::from_fn(total, p, |r, j| sim(&features[r], &features[landmarks[j]]));
    let c_landmarks = DMatrix::from_fn(p, p, |r, j| sim(&features[landmarks[r]], &features[landmarks[j]]));
    let svd = pinv(&c_landmarks).svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let root = DMatrix::from_diagonal(&svd.singular_values.map(f64::sqrt));
    let mut y = c * u * root;
    for mut row in y.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
    (y.rows(0, n1).into_owned(), y.rows(n1, total - n1).into_owned())
}

pub fn regal_distance(g1: &Graph, g2: &Graph, seed_value: u64) -> f64 {
    let (y1, y2) = regal_embeddings(g1, g2, seed_value);
    symmetric_best_match(&y1, &y2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins() {
        assert_eq!((log2_bin(1), log2_bin(2), log2_bin(3), log2_bin(4), log2_bin(9)), (0, 1, 1, 2, 3));
        assert_eq!(landmark_count(8), 8);
        assert_eq!(landmark_count(64), 60);
    }

    #[test]
    fn identical_graphs_at_zero() {
        let g = Graph::star(7);
        assert!(regal_distance(&g, &g, 3) < 1e-9);
    }
}
