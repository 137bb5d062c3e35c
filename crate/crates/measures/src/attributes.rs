//! Attribute measures: size and density balance, degree and community divergence.

use std::collections::BTreeMap;

use graphsim_core::{linear_density, Graph};

fn balance(a: f64, b: f64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if hi == 0.0 {
        1.0
    } else {
        lo / hi
    }
}

pub fn size_balance(g1: &Graph, g2: &Graph) -> f64 {
    balance(g1.node_count() as f64, g2.node_count() as f64)
}

pub fn density_balance(g1: &Graph, g2: &Graph) -> f64 {
    balance(linear_density(g1), linear_density(g2))
}

/// Histogram-based Jaccard similarity: sum of per-value minima over sum of maxima.
pub fn multiset_jaccard(a: &[usize], b: &[usize]) -> f64 {
    let mut counts: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for &x in a {
        counts.entry(x).or_default().0 += 1;
    }
    for &x in b {
        counts.entry(x).or_default().1 += 1;
    }
    let (num, den) = counts.values().fold((0usize, 0usize), |(num, den), &(x, y)| (num + x.min(y), den + x.max(y)));
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

pub fn degree_divergence(g1: &Graph, g2: &Graph) -> f64 {
    multiset_jaccard(&g1.degrees(), &g2.degrees())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balances() {
        assert_eq!(size_balance(&Graph::path(10), &Graph::path(20)), 0.5);
        assert_eq!(size_balance(&Graph::path(400), &Graph::path(10)), 0.025);
        assert!((density_balance(&Graph::cycle(10), &Graph::complete(4)) - 1.0 / 1.5).abs() < 1e-15);
    }

    #[test]
    fn jaccard_examples() {
        assert_eq!(multiset_jaccard(&[1, 1, 2], &[1, 2, 3]), 0.5);
        assert!((multiset_jaccard(&[3, 3], &[3, 4]) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(multiset_jaccard(&[2, 5], &[5, 2]), 1.0);
    }
}
