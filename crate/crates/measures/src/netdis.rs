//! Netdis: ego-network graphlet counts centred by a density-matched random null.

use graphsim_core::Graph;

use crate::graphlets::{pair_bit, table, BitAdjacency, GraphletTable};

pub const MIN_GRAPHLET: usize = 3;
pub const DEFAULT_MAX_GRAPHLET: usize = 5;
/// Smallest graph accepted by the measure.
pub const MIN_NODES: usize = 5;

/// Bitset of nodes within distance 2 of each node.
fn two_hop_balls(g: &Graph) -> Vec<Vec<u64>> {
    let n = g.node_count();
    let words = n.div_ceil(64);
    (0..n)
        .map(|v| {
            let mut ball = vec![0u64; words];
            let mut set = |u: usize| ball[u / 64] |= 1 << (u % 64);
            set(v);
            for &u in g.neighbors(v) {
                set(u);
                for &w in g.neighbors(u) {
                    set(w);
                }
            }
            ball
        })
        .collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Centred graphlet counts `S_w = sum_v (N_w(v) - E_w(v))` for one graphlet size.
#[derive(Debug, Clone, PartialEq)]
pub struct CentredCounts {
    pub k: usize,
    pub observed: Vec<f64>,
    pub expected: Vec<f64>,
}

impl CentredCounts {
    pub fn centred(&self) -> Vec<f64> {
        self.observed.iter().zip(&self.expected).map(|(o, e)| o - e).collect()
    }
}

/// ESU enumeration that carries, per depth, the induced adjacency mask and the
/// intersection of the members' 2-balls. A subgraph lies in the ego net of v iff
/// all its nodes are in v's 2-ball, so the intersection is exactly its set of egos.
struct EgoCounter<'a> {
    g: &'a Graph,
    adj: BitAdjacency,
    balls: &'a [Vec<u64>],
    words: usize,
    max_k: usize,
    root: usize,
    sub: Vec<usize>,
    touched: Vec<u32>,
    masks: Vec<u32>,
    inter: Vec<u64>,
    tables: Vec<&'static GraphletTable>,
    observed: Vec<Vec<f64>>,
}

impl EgoCounter<'_> {
    fn mark(&mut self, w: usize, delta: i32) {
        let step = |c: &mut u32| *c = c.wrapping_add_signed(delta);
        step(&mut self.touched[w]);
        for &u in self.g.neighbors(w) {
            step(&mut self.touched[u]);
        }
    }

    fn push(&mut self, w: usize, leaf: bool) {
        let depth = self.sub.len();
        let mut mask = if depth == 0 { 0 } else { self.masks[depth - 1] };
        for (i, &s) in self.sub.iter().enumerate() {
            if self.adj.has_edge(s, w) {
                mask |= 1 << pair_bit(i, depth);
            }
        }
        self.masks[depth] = mask;
        let words = self.words;
        for i in 0..words {
            let prev = if depth == 0 { u64::MAX } else { self.inter[(depth - 1) * words + i] };
            self.inter[depth * words + i] = prev & self.balls[w][i];
        }
        self.sub.push(w);
        if !leaf {
            self.mark(w, 1);
        }
    }

    fn pop(&mut self, leaf: bool) {
        let w = self.sub.pop().expect("pop follows push");
        if !leaf {
            self.mark(w, -1);
        }
    }

    fn record(&mut self) {
        let k = self.sub.len();
        if k >= MIN_GRAPHLET {
            let words = self.words;
            let egos: u32 = self.inter[(k - 1) * words..k * words].iter().map(|w| w.count_ones()).sum();
            let class = self.tables[k - MIN_GRAPHLET].class_of[self.masks[k - 1] as usize].expect("ESU yields connected subgraphs");
            self.observed[k - MIN_GRAPHLET][class] += egos as f64;
        }
    }

    fn extend(&mut self, mut ext: Vec<usize>) {
        self.record();
        if self.sub.len() + 1 == self.max_k {
            // Last level: every extension node closes a subgraph, nothing to recurse into.
            for &w in &ext {
                self.push(w, true);
                self.record();
                self.pop(true);
            }
            return;
        }
        while let Some(w) = ext.pop() {
            let mut next = ext.clone();
            let root = self.root;
            next.extend(self.g.neighbors(w).iter().copied().filter(|&u| u > root && self.touched[u] == 0));
            self.push(w, false);
            self.extend(next);
            self.pop(false);
        }
    }
}

/// Centred counts for sizes `MIN_GRAPHLET..=max_k`, summed over all 2-step ego networks.
pub fn netdis_counts(g: &Graph, max_k: usize) -> Vec<CentredCounts> {
    let balls = two_hop_balls(g);
    let sizes: Vec<usize> = (MIN_GRAPHLET..=max_k).collect();
    let tables: Vec<&'static GraphletTable> = sizes.iter().map(|&k| table(k)).collect();
    let words = g.node_count().div_ceil(64);
    let mut counter = EgoCounter {
        g,
        adj: BitAdjacency::new(g),
        balls: &balls,
        words,
        max_k,
        root: 0,
        sub: Vec::with_capacity(max_k),
        touched: vec![0; g.node_count()],
        masks: vec![0; max_k],
        inter: vec![0; max_k * words],
        observed: tables.iter().map(|t| vec![0.0; t.classes.len()]).collect(),
        tables,
    };
    for v in 0..g.node_count() {
        counter.root = v;
        counter.push(v, false);
        let ext: Vec<usize> = g.neighbors(v).iter().copied().filter(|&u| u > v).collect();
        counter.extend(ext);
        counter.pop(false);
    }
    let observed = counter.observed;

    let ego_stats: Vec<(usize, f64)> = balls
        .iter()
        .map(|ball| {
            let members: Vec<usize> =
                ball.iter().enumerate().flat_map(|(i, &w)| (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| i * 64 + b)).collect();
            let inner =
                members.iter().map(|&u| g.neighbors(u).iter().filter(|&&w| ball[w / 64] >> (w % 64) & 1 == 1).count()).sum::<usize>() / 2;
            let pairs = binomial(members.len(), 2);
            let p = if pairs > 0.0 { inner as f64 / pairs } else { 0.0 };
            (members.len(), p)
        })
        .collect();

    sizes
        .iter()
        .zip(observed)
        .map(|(&k, observed)| {
            let t = table(k);
            let slots = (k * (k - 1) / 2) as i32;
            let expected = t
                .classes
                .iter()
                .map(|c| {
                    let e = c.edges as i32;
                    ego_stats
                        .iter()
                        .map(|&(size, p)| binomial(size, k) * c.labelled_copies as f64 * p.powi(e) * (1.0 - p).powi(slots - e))
                        .sum()
                })
                .collect();
            CentredCounts { k, observed, expected }
        })
        .collect()
}

/// Netdis distance for one graphlet size from the two centred count vectors; in [0, 1].
pub fn netdis_statistic(s1: &[f64], s2: &[f64]) -> f64 {
    let (mut cross, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (&a, &b) in s1.iter().zip(s2) {
        let r = (a * a + b * b).sqrt();
        if r == 0.0 {
            continue;
        }
        cross += a * b / r;
        m1 += a * a / r;
        m2 += b * b / r;
    }
    let m = m1.sqrt() * m2.sqrt();
    if m == 0.0 {
        return if m1 == 0.0 && m2 == 0.0 { 0.0 } else { 0.5 };
    }
    (0.5 * (1.0 - cross / m)).clamp(0.0, 1.0)
}

/// Mean of the per-size Netdis distances over all graphlet sizes in the counts.
pub fn netdis_raw(c1: &[CentredCounts], c2: &[CentredCounts]) -> f64 {
    let per_size: Vec<f64> = c1.iter().zip(c2).map(|(a, b)| netdis_statistic(&a.centred(), &b.centred())).collect();
    per_size.iter().sum::<f64>() / per_size.len().max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statistic_bounds() {
        assert_eq!(netdis_statistic(&[1.0, -2.0], &[1.0, -2.0]), 0.0);
        assert!((netdis_statistic(&[1.0, 0.0], &[-1.0, 0.0]) - 1.0).abs() < 1e-12);
        assert_eq!(netdis_statistic(&[0.0, 0.0], &[0.0, 0.0]), 0.0);
    }

    #[test]
    fn complete_graph_matches_null() {
        // Every ego net of K5 is K5 itself with p = 1, so the null reproduces the counts.
        for c in netdis_counts(&Graph::complete(5), 4) {
            for (o, e) in c.observed.iter().zip(&c.expected) {
                assert!((o - e).abs() < 1e-9, "k={} {o} vs {e}", c.k);
            }
        }
    }
}
