//! Louvain modularity optimisation.

use graphsim_core::seed;
use graphsim_core::Graph;
use rand::seq::SliceRandom;

use crate::canon::canonical_ranks;

/// Community label per node; labels are `0..k` in order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
}

impl Partition {
    pub fn from_labels(raw: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|&l| {
                let next = map.len();
                *map.entry(l).or_insert(next)
            })
            .collect();
        Self { labels }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn community_count(&self) -> usize {
        self.labels.iter().copied().max().map_or(0, |m| m + 1)
    }

    /// Community sizes in descending order.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.community_count()];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }
}

/// Newman modularity of a partition of an unweighted graph.
pub fn modularity(g: &Graph, labels: &[usize]) -> f64 {
    let m2 = 2.0 * g.edge_count() as f64;
    if m2 == 0.0 {
        return 0.0;
    }
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut inside = vec![0.0; k];
    let mut total = vec![0.0; k];
    for u in 0..g.node_count() {
        total[labels[u]] += g.degree(u) as f64;
        for &v in g.neighbors(u) {
            if labels[u] == labels[v] {
                inside[labels[u]] += 1.0;
            }
        }
    }
    inside.iter().zip(&total).map(|(i, t)| i / m2 - (t / m2).powi(2)).sum()
}

struct Weighted {
    adj: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    m2: f64,
}

impl Weighted {
    fn strength(&self, u: usize) -> f64 {
        self.adj[u].iter().map(|&(_, w)| w).sum::<f64>() + self.self_loops[u]
    }
}

const GAIN_EPS: f64 = 1e-12;

/// One level of local moves. Returns the community of each node and whether any moved.
fn local_moves(w: &Weighted, rng: &mut seed::Rng) -> (Vec<usize>, bool) {
    let n = w.adj.len();
    let strength: Vec<f64> = (0..n).map(|u| w.strength(u)).collect();
    let mut comm: Vec<usize> = (0..n).collect();
    let mut tot = strength.clone();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut links = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut moved_any = false;
    loop {
        let mut moved = false;
        for &u in &order {
            let cu = comm[u];
            for &(v, wt) in &w.adj[u] {
                let c = comm[v];
                if links[c] == 0.0 {
                    touched.push(c);
                }
                links[c] += wt;
            }
            tot[cu] -= strength[u];
            let gain = |c: usize| links[c] - tot[c] * strength[u] / w.m2;
            let mut best = cu;
            let mut best_gain = gain(cu);
            for &c in &touched {
                let g = gain(c);
                if g > best_gain + GAIN_EPS {
                    best = c;
                    best_gain = g;
                }
            }
            tot[best] += strength[u];
            if best != cu {
                comm[u] = best;
                moved = true;
                moved_any = true;
            }
            for &c in &touched {
                links[c] = 0.0;
            }
            touched.clear();
        }
        if !moved {
            break;
        }
    }
    (comm, moved_any)
}

fn aggregate(w: &Weighted, comm: &[usize]) -> (Weighted, Vec<usize>) {
    let p = Partition::from_labels(comm);
    let k = p.community_count();
    let mut self_loops = vec![0.0; k];
    let mut maps: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); k];
    for u in 0..w.adj.len() {
        let cu = p.labels[u];
        self_loops[cu] += w.self_loops[u];
        for &(v, wt) in &w.adj[u] {
            let cv = p.labels[v];
            if cu == cv {
                self_loops[cu] += wt;
            } else {
                *maps[cu].entry(cv).or_insert(0.0) += wt;
            }
        }
    }
    let adj = maps.into_iter().map(|m| m.into_iter().collect()).collect();
    (Weighted { adj, self_loops, m2: w.m2 }, p.labels)
}

/// Multi-level Louvain. The graph is first relabelled into canonical order so the
/// result does not depend on the input numbering; `seed` fixes the node visit order.
pub fn louvain_partition(g: &Graph, seed_value: u64) -> Partition {
    let ranks = canonical_ranks(g);
    let canon = g.permuted(&ranks);
    let n = canon.node_count();
    let mut w = Weighted {
        adj: (0..n).map(|u| canon.neighbors(u).iter().map(|&v| (v, 1.0)).collect()).collect(),
        self_loops: vec![0.0; n],
        m2: 2.0 * canon.edge_count() as f64,
    };
    let mut membership: Vec<usize> = (0..n).collect();
    if w.m2 > 0.0 {
        let mut rng = seed::rng(seed::derive(seed_value, "louvain"));
        loop {
            let (comm, moved) = local_moves(&w, &mut rng);
            if !moved {
                break;
            }
            let (next, labels) = aggregate(&w, &comm);
            for m in membership.iter_mut() {
                *m = labels[*m];
            }
            w = next;
        }
    }
    let original: Vec<usize> = (0..n).map(|u| membership[ranks[u]]).collect();
    Partition::from_labels(&original)
}
