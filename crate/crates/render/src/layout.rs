//! Node placement: Fruchterman-Reingold, circular, and a UMAP embedding of the
//! shortest-path metric. Every drawing is normalized into the unit square.

use std::collections::VecDeque;

use graphsim_core::{seed, Graph, LayoutKind};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub const FR_ITERATIONS: usize = 500;
pub const CIRCLE_RADIUS: f64 = 0.45;
pub const UMAP_NEIGHBORS: usize = 15;
pub const UMAP_EPOCHS: usize = 200;
pub const UMAP_NEGATIVE_SAMPLES: usize = 5;
/// Curve parameters fitted by UMAP for `min_dist = 0.1`, `spread = 1`.
pub const UMAP_A: f64 = 1.576_943_460_311_307_7;
pub const UMAP_B: f64 = 0.895_060_878_112_785_9;

/// Node positions in the unit square for one graph and layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Drawing {
    pub graph_id: String,
    pub layout: LayoutKind,
    pub seed: u64,
    pub positions: Vec<[f64; 2]>,
}

/// Dispatches to the layout algorithm for `kind`.
pub fn layout(kind: LayoutKind, g: &Graph, seed_value: u64) -> Vec<[f64; 2]> {
    match kind {
        LayoutKind::ForceDirected => layout_fr(g, seed_value),
        LayoutKind::Circular => layout_circular(g),
        LayoutKind::Umap => layout_umap(g, seed_value),
    }
}

pub fn draw(graph_id: &str, kind: LayoutKind, g: &Graph, seed_value: u64) -> Drawing {
    Drawing { graph_id: graph_id.to_string(), layout: kind, seed: seed_value, positions: layout(kind, g, seed_value) }
}

/// Uniform scaling (aspect ratio kept) that centres the points in the unit square and
/// makes the longer side of their bounding box span [0, 1].
pub fn normalize_unit_square(points: &mut [[f64; 2]]) {
    if points.is_empty() {
        return;
    }
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points.iter() {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let centre = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    for p in points.iter_mut() {
        for a in 0..2 {
            p[a] = if extent > 0.0 { (0.5 + (p[a] - centre[a]) / extent).clamp(0.0, 1.0) } else { 0.5 };
        }
    }
}

/// Fruchterman-Reingold with linear cooling over [`FR_ITERATIONS`] steps.
pub fn layout_fr(g: &Graph, seed_value: u64) -> Vec<[f64; 2]> {
    let n = g.node_count();
    let mut rng = seed::rng(seed::derive(seed_value, "fr"));
    let mut pos: Vec<[f64; 2]> = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
    if n > 1 {
        let k = (1.0 / n as f64).sqrt();
        let mut t = 0.1;
        let dt = t / (FR_ITERATIONS + 1) as f64;
        let mut disp = vec![[0.0f64; 2]; n];
        for _ in 0..FR_ITERATIONS {
            disp.iter_mut().for_each(|d| *d = [0.0, 0.0]);
            for i in 0..n {
                for j in i + 1..n {
                    let delta = [pos[i][0] - pos[j][0], pos[i][1] - pos[j][1]];
                    let dist = (delta[0] * delta[0] + delta[1] * delta[1]).sqrt().max(0.01);
                    let f = k * k / (dist * dist);
                    for a in 0..2 {
                        disp[i][a] += delta[a] * f;
                        disp[j][a] -= delta[a] * f;
                    }
                }
            }
            for (u, v) in g.edges() {
                let delta = [pos[u][0] - pos[v][0], pos[u][1] - pos[v][1]];
                let dist = (delta[0] * delta[0] + delta[1] * delta[1]).sqrt().max(0.01);
                let f = dist / k;
                for a in 0..2 {
                    disp[u][a] -= delta[a] * f;
                    disp[v][a] += delta[a] * f;
                }
            }
            for (p, d) in pos.iter_mut().zip(&disp) {
                let len = (d[0] * d[0] + d[1] * d[1]).sqrt().max(0.01);
                p[0] += d[0] * t / len;
                p[1] += d[1] * t / len;
            }
            t -= dt;
        }
    }
    normalize_unit_square(&mut pos);
    pos
}

/// BFS order from the maximum-degree node (lowest index on ties), neighbours by
/// index; unreached nodes follow in index order.
pub fn circular_order(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let start = (0..n).max_by_key(|&u| (g.degree(u), std::cmp::Reverse(u)));
    for root in start.into_iter().chain(0..n) {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in g.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    order
}

pub fn layout_circular(g: &Graph) -> Vec<[f64; 2]> {
    let n = g.node_count();
    let mut pos = vec![[0.5, 0.5]; n];
    if n > 1 {
        for (slot, u) in circular_order(g).into_iter().enumerate() {
            let angle = std::f64::consts::TAU * slot as f64 / n as f64;
            pos[u] = [0.5 + CIRCLE_RADIUS * angle.cos(), 0.5 + CIRCLE_RADIUS * angle.sin()];
        }
    }
    pos
}

/// Fuzzy simplicial set of the k-nearest-neighbour graph under shortest-path distance
/// (each node counts as its own first neighbour), symmetrized with the probabilistic
/// t-conorm.
pub fn fuzzy_graph(g: &Graph, k: usize) -> Vec<(usize, usize, f64)> {
    let n = g.node_count();
    let d = g.all_pairs_distances();
    let k = k.min(n);
    let mut w = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        others.sort_by_key(|&j| (d.get(i, j), j));
        let knn: Vec<(usize, f64)> = others[..k - 1].iter().map(|&j| (j, d.get(i, j) as f64)).collect();
        let rho = knn.iter().map(|&(_, x)| x).find(|&x| x > 0.0).unwrap_or(0.0);
        let target = (k as f64).log2();
        let sum = |sigma: f64| knn.iter().map(|&(_, x)| (-(x - rho).max(0.0) / sigma).exp()).sum::<f64>();
        let (mut lo, mut hi, mut sigma) = (0.0f64, f64::INFINITY, 1.0f64);
        for _ in 0..64 {
            let s = sum(sigma);
            if (s - target).abs() < 1e-5 {
                break;
            }
            if s > target {
                hi = sigma;
                sigma = 0.5 * (lo + hi);
            } else {
                lo = sigma;
                sigma = if hi.is_infinite() { sigma * 2.0 } else { 0.5 * (lo + hi) };
            }
        }
        let mean = knn.iter().map(|&(_, x)| x).sum::<f64>() / k as f64;
        sigma = sigma.max(1e-3 * mean);
        for &(j, x) in &knn {
            w[(i, j)] = (-(x - rho).max(0.0) / sigma).exp();
        }
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (w[(i, j)], w[(j, i)]);
            let s = a + b - a * b;
            if s > 0.0 {
                edges.push((i, j, s));
            }
        }
    }
    edges
}

fn spectral_init(n: usize, edges: &[(usize, usize, f64)], rng: &mut seed::Rng) -> Vec<[f64; 2]> {
    let mut deg = vec![0.0; n];
    for &(i, j, w) in edges {
        deg[i] += w;
        deg[j] += w;
    }
    let mut l = DMatrix::<f64>::identity(n, n);
    for &(i, j, w) in edges {
        let v = -w / (deg[i] * deg[j]).sqrt();
        l[(i, j)] = v;
        l[(j, i)] = v;
    }
    let eig = l.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let noise = Normal::new(0.0, 1e-4).expect("valid normal");
    let mut pos: Vec<[f64; 2]> = (0..n).map(|i| [eig.eigenvectors[(i, order[1])], eig.eigenvectors[(i, order[2])]]).collect();
    let max = pos.iter().flat_map(|p| p.iter().map(|x| x.abs())).fold(0.0, f64::max);
    let scale = if max > 0.0 { 10.0 / max } else { 1.0 };
    for p in pos.iter_mut() {
        for x in p.iter_mut() {
            *x = *x * scale + noise.sample(rng);
        }
    }
    // Each axis spans [0, 10] before optimization.
    for ax in 0..2 {
        let lo = pos.iter().map(|p| p[ax]).fold(f64::INFINITY, f64::min);
        let hi = pos.iter().map(|p| p[ax]).fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            pos.iter_mut().for_each(|p| p[ax] = 10.0 * (p[ax] - lo) / (hi - lo));
        }
    }
    pos
}

fn clip(x: f64) -> f64 {
    x.clamp(-4.0, 4.0)
}

/// UMAP embedding with spectral initialization and negative-sampling SGD.
pub fn layout_umap(g: &Graph, seed_value: u64) -> Vec<[f64; 2]> {
    let n = g.node_count();
    let mut rng = seed::rng(seed::derive(seed_value, "umap"));
    if n <= 3 {
        // Too few nodes for a 2-D spectral start; any placement is an embedding.
        let mut pos: Vec<[f64; 2]> = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
        normalize_unit_square(&mut pos);
        return pos;
    }
    let mut edges = fuzzy_graph(g, UMAP_NEIGHBORS);
    let w_max = edges.iter().map(|e| e.2).fold(0.0, f64::max);
    edges.retain(|e| e.2 >= w_max / UMAP_EPOCHS as f64);
    let mut pos = spectral_init(n, &edges, &mut rng);
    let mut directed: Vec<(usize, usize, f64)> = edges.iter().flat_map(|&(i, j, w)| [(i, j, w), (j, i, w)]).collect();
    directed.sort_by_key(|&(i, j, _)| (i, j));
    let edges = directed;

    let eps: Vec<f64> = edges.iter().map(|e| w_max / e.2).collect();
    let eps_neg: Vec<f64> = eps.iter().map(|e| e / UMAP_NEGATIVE_SAMPLES as f64).collect();
    let mut next = eps.clone();
    let mut next_neg = eps_neg.clone();
    let (a, b) = (UMAP_A, UMAP_B);
    for epoch in 0..UMAP_EPOCHS {
        let alpha = 1.0 - epoch as f64 / UMAP_EPOCHS as f64;
        let e = epoch as f64;
        for (idx, &(i, j, _)) in edges.iter().enumerate() {
            if next[idx] > e {
                continue;
            }
            let delta = [pos[i][0] - pos[j][0], pos[i][1] - pos[j][1]];
            let d2 = delta[0] * delta[0] + delta[1] * delta[1];
            let coeff = if d2 > 0.0 { -2.0 * a * b * d2.powf(b - 1.0) / (1.0 + a * d2.powf(b)) } else { 0.0 };
            for ax in 0..2 {
                let step = clip(coeff * delta[ax]) * alpha;
                pos[i][ax] += step;
                pos[j][ax] -= step;
            }
            next[idx] += eps[idx];
            let negatives = ((e - next_neg[idx]) / eps_neg[idx]).floor().max(0.0) as usize;
            for _ in 0..negatives {
                let other = rng.random_range(0..n);
                if other == i {
                    continue;
                }
                let delta = [pos[i][0] - pos[other][0], pos[i][1] - pos[other][1]];
                let d2 = delta[0] * delta[0] + delta[1] * delta[1];
                if d2 > 0.0 {
                    let coeff = 2.0 * b / ((0.001 + d2) * (1.0 + a * d2.powf(b)));
                    for ax in 0..2 {
                        pos[i][ax] += clip(coeff * delta[ax]) * alpha;
                    }
                }
            }
            next_neg[idx] += negatives as f64 * eps_neg[idx];
        }
    }
    normalize_unit_square(&mut pos);
    pos
}
