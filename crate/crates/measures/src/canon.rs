//! Label-independent node ordering by colour refinement with individualization.

use graphsim_core::Graph;

/// Refines `colours` to the coarsest equitable partition. Colours are dense ranks and
/// depend only on the previous colours and neighbourhood structure, never on indices.
fn refine(g: &Graph, colours: &mut Vec<u32>) {
    let n = g.node_count();
    let mut distinct = count_distinct(colours);
    loop {
        let signatures: Vec<(u32, Vec<u32>)> = (0..n)
            .map(|u| {
                let mut nb: Vec<u32> = g.neighbors(u).iter().map(|&v| colours[v]).collect();
                nb.sort_unstable();
                (colours[u], nb)
            })
            .collect();
        let next = dense_ranks(&signatures);
        let next_distinct = count_distinct(&next);
        *colours = next;
        if next_distinct == distinct {
            return;
        }
        distinct = next_distinct;
    }
}

fn dense_ranks<T: Ord>(keys: &[T]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut ranks = vec![0u32; keys.len()];
    let mut rank = 0u32;
    for w in 0..order.len() {
        if w > 0 && keys[order[w]] != keys[order[w - 1]] {
            rank += 1;
        }
        ranks[order[w]] = rank;
    }
    ranks
}

fn count_distinct(colours: &[u32]) -> usize {
    colours.iter().copied().max().map_or(0, |m| m as usize + 1)
}

/// Canonical rank of every node. Isomorphic graphs receive orderings that agree up to
/// an automorphism whenever refinement cells consist of automorphic nodes, which holds
/// for all but contrived regular graphs.
pub fn canonical_ranks(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    let mut colours = dense_ranks(&g.degrees());
    refine(g, &mut colours);
    while count_distinct(&colours) < n {
        let mut sizes = vec![0usize; n];
        for &c in &colours {
            sizes[c as usize] += 1;
        }
        let cell = (0..n).find(|&c| sizes[c] > 1).expect("a non-singleton cell exists") as u32;
        let pick = (0..n).find(|&u| colours[u] == cell).expect("cell is non-empty");
        let keys: Vec<(u32, bool)> = (0..n).map(|u| (colours[u], u != pick)).collect();
        colours = dense_ranks(&keys);
        refine(g, &mut colours);
    }
    colours.into_iter().map(|c| c as usize).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_are_a_permutation() {
        for g in [Graph::path(5), Graph::cycle(6), Graph::star(5), Graph::complete(4)] {
            let mut r = canonical_ranks(&g);
            r.sort_unstable();
            assert_eq!(r, (0..g.node_count()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn relabeled_graph_maps_to_same_canonical_form() {
        let g = Graph::new(6, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5)]).unwrap();
        let perm = [4, 2, 0, 5, 1, 3];
        let h = g.permuted(&perm);
        assert_eq!(g.permuted(&canonical_ranks(&g)), h.permuted(&canonical_ranks(&h)));
    }
}
