//! Connected induced subgraph enumeration (ESU) and graphlet classification.

use std::sync::OnceLock;

use graphsim_core::Graph;

/// Largest graphlet size supported by the classification tables.
pub const MAX_GRAPHLET: usize = 5;

/// Dense adjacency bit matrix for constant-time edge lookups.
#[derive(Debug, Clone)]
pub struct BitAdjacency {
    words: usize,
    bits: Vec<u64>,
}

impl BitAdjacency {
    pub fn new(g: &Graph) -> Self {
        let n = g.node_count();
        let words = n.div_ceil(64).max(1);
        let mut bits = vec![0u64; n * words];
        for (u, v) in g.edges() {
            bits[u * words + v / 64] |= 1 << (v % 64);
            bits[v * words + u / 64] |= 1 << (u % 64);
        }
        BitAdjacency { words, bits }
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }
}

struct Esu<'a, F> {
    g: &'a Graph,
    max_k: usize,
    root: usize,
    sub: Vec<usize>,
    /// Number of subgraph nodes equal or adjacent to each node.
    touched: Vec<u32>,
    visit: F,
}

impl<F: FnMut(&[usize])> Esu<'_, F> {
    fn mark(&mut self, w: usize, delta: i32) {
        let step = |c: &mut u32| *c = c.wrapping_add_signed(delta);
        step(&mut self.touched[w]);
        for &u in self.g.neighbors(w) {
            step(&mut self.touched[u]);
        }
    }

    fn extend(&mut self, mut ext: Vec<usize>) {
        if self.sub.len() >= 2 {
            (self.visit)(&self.sub);
        }
        if self.sub.len() == self.max_k {
            return;
        }
        if self.sub.len() + 1 == self.max_k {
            for &w in &ext {
                self.sub.push(w);
                (self.visit)(&self.sub);
                self.sub.pop();
            }
            return;
        }
        while let Some(w) = ext.pop() {
            let mut next = ext.clone();
            // Exclusive neighbours only: not in the subgraph nor adjacent to it.
            next.extend(self.g.neighbors(w).iter().copied().filter(|&u| u > self.root && self.touched[u] == 0));
            self.sub.push(w);
            self.mark(w, 1);
            self.extend(next);
            self.mark(w, -1);
            self.sub.pop();
        }
    }
}

/// Calls `visit` once for every connected induced subgraph with 2..=`max_k` nodes.
pub fn for_each_connected_subgraph<F: FnMut(&[usize])>(g: &Graph, max_k: usize, visit: F) {
    let mut esu = Esu { g, max_k, root: 0, sub: Vec::with_capacity(max_k), touched: vec![0; g.node_count()], visit };
    for v in 0..g.node_count() {
        esu.root = v;
        esu.sub.push(v);
        esu.mark(v, 1);
        let ext: Vec<usize> = g.neighbors(v).iter().copied().filter(|&u| u > v).collect();
        esu.extend(ext);
        esu.mark(v, -1);
        esu.sub.pop();
    }
}

/// Bit index of pair `(i, j)`, `i < j`, in an adjacency mask. The layout does not
/// depend on the subgraph size, so a mask can grow one node at a time.
pub fn pair_bit(i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    j * (j - 1) / 2 + i
}

/// Adjacency mask of the subgraph induced by `nodes` (in the given order).
pub fn induced_mask(adj: &BitAdjacency, nodes: &[usize]) -> u32 {
    let k = nodes.len();
    let mut mask = 0u32;
    for i in 0..k {
        for j in i + 1..k {
            if adj.has_edge(nodes[i], nodes[j]) {
                mask |= 1 << pair_bit(i, j);
            }
        }
    }
    mask
}

/// One isomorphism class of connected graphs on `k` nodes.
#[derive(Debug, Clone)]
pub struct GraphletClass {
    pub canonical_mask: u32,
    pub edges: u32,
    /// Number of labelled graphs on `k` fixed nodes in this class, `k! / |Aut|`.
    pub labelled_copies: u64,
}

/// Classification table for `k`-node graphs: class index per mask (`None` if
/// disconnected) and the connected classes ordered by canonical mask.
#[derive(Debug)]
pub struct GraphletTable {
    pub k: usize,
    pub class_of: Vec<Option<usize>>,
    pub classes: Vec<GraphletClass>,
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..k).collect();
    fn rec(p: &mut Vec<usize>, i: usize, out: &mut Vec<Vec<usize>>) {
        if i == p.len() {
            out.push(p.clone());
            return;
        }
        for j in i..p.len() {
            p.swap(i, j);
            rec(p, i + 1, out);
            p.swap(i, j);
        }
    }
    rec(&mut p, 0, &mut out);
    out
}

fn mask_connected(k: usize, mask: u32) -> bool {
    let mut seen = 1u32;
    let mut stack = vec![0usize];
    while let Some(u) = stack.pop() {
        for v in 0..k {
            if v != u && seen & (1 << v) == 0 {
                let (a, b) = if u < v { (u, v) } else { (v, u) };
                if mask & (1 << pair_bit(a, b)) != 0 {
                    seen |= 1 << v;
                    stack.push(v);
                }
            }
        }
    }
    seen.count_ones() as usize == k
}

fn build_table(k: usize) -> GraphletTable {
    let bits = k * (k - 1) / 2;
    let perms = permutations(k);
    let permute = |mask: u32, p: &[usize]| -> u32 {
        let mut out = 0u32;
        for i in 0..k {
            for j in i + 1..k {
                if mask & (1 << pair_bit(i, j)) != 0 {
                    let (a, b) = if p[i] < p[j] { (p[i], p[j]) } else { (p[j], p[i]) };
                    out |= 1 << pair_bit(a, b);
                }
            }
        }
        out
    };
    let size = 1usize << bits;
    let mut canonical = vec![0u32; size];
    for mask in 0..size as u32 {
        canonical[mask as usize] = perms.iter().map(|p| permute(mask, p)).min().expect("k >= 1");
    }
    let mut reps: Vec<u32> = (0..size as u32).filter(|&m| canonical[m as usize] == m && mask_connected(k, m)).collect();
    reps.sort_unstable();
    let mut classes: Vec<GraphletClass> =
        reps.iter().map(|&m| GraphletClass { canonical_mask: m, edges: m.count_ones(), labelled_copies: 0 }).collect();
    let mut class_of = vec![None; size];
    for mask in 0..size {
        if let Ok(idx) = reps.binary_search(&canonical[mask]) {
            class_of[mask] = Some(idx);
            classes[idx].labelled_copies += 1;
        }
    }
    GraphletTable { k, class_of, classes }
}

/// Cached classification table for `k` in `2..=MAX_GRAPHLET`.
pub fn table(k: usize) -> &'static GraphletTable {
    static TABLES: OnceLock<Vec<GraphletTable>> = OnceLock::new();
    assert!((2..=MAX_GRAPHLET).contains(&k), "graphlet size {k} unsupported");
    &TABLES.get_or_init(|| (2..=MAX_GRAPHLET).map(build_table).collect())[k - 2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_counts() {
        // Connected graphs on 2..5 nodes: 1, 2, 6, 21.
        let counts: Vec<usize> = (2..=5).map(|k| table(k).classes.len()).collect();
        assert_eq!(counts, vec![1, 2, 6, 21]);
        // Labelled connected graphs: 1, 4, 38, 728.
        let labelled: Vec<u64> = (2..=5).map(|k| table(k).classes.iter().map(|c| c.labelled_copies).sum()).collect();
        assert_eq!(labelled, vec![1, 4, 38, 728]);
    }

    #[test]
    fn esu_counts_on_k4() {
        let mut by_size = [0usize; 5];
        for_each_connected_subgraph(&Graph::complete(4), 4, |s| by_size[s.len()] += 1);
        assert_eq!(by_size, [0, 0, 6, 4, 1]);
    }
}
