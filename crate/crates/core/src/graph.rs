use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

/// Sentinel distance for unreachable node pairs.
pub const UNREACHABLE: u32 = u32::MAX;

/// Simple undirected, unweighted graph with a single connected component.
///
/// Nodes are `0..node_count()`. Neighbor lists are kept sorted so iteration order,
/// and therefore everything seeded that walks the graph, is reproducible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    edge_count: usize,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<GraphRepr> for Graph {
    type Error = GraphError;

    fn try_from(r: GraphRepr) -> Result<Self, Self::Error> {
        Graph::new(r.nodes, r.edges)
    }
}

impl From<Graph> for GraphRepr {
    fn from(g: Graph) -> Self {
        GraphRepr { nodes: g.node_count(), edges: g.edges().collect() }
    }
}

impl Graph {
    /// Builds a graph, rejecting self-loops, parallel edges, out-of-range endpoints
    /// and anything with more than one connected component.
    pub fn new<I>(node_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let g = Self::build_simple(node_count, edges)?;
        let components = count_components(&g.adj);
        if components != 1 {
            return Err(GraphError::Disconnected(components));
        }
        Ok(g)
    }

    /// Like [`Graph::new`] but drops duplicate edges and self-loops instead of failing.
    pub fn new_dedup<I>(node_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut cleaned: Vec<(usize, usize)> =
            edges.into_iter().filter(|&(u, v)| u != v).map(|(u, v)| if u < v { (u, v) } else { (v, u) }).collect();
        cleaned.sort_unstable();
        cleaned.dedup();
        Self::new(node_count, cleaned)
    }

    fn build_simple<I>(node_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if node_count == 0 {
            return Err(GraphError::Empty);
        }
        let mut adj = vec![Vec::new(); node_count];
        let mut edge_count = 0;
        for (u, v) in edges {
            if u >= node_count || v >= node_count {
                return Err(GraphError::NodeOutOfRange(u, v, node_count));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adj[u].push(v);
            adj[v].push(u);
            edge_count += 1;
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                let v = w[0];
                return Err(GraphError::ParallelEdge(u.min(v), u.max(v)));
            }
        }
        Ok(Self { adj, edge_count })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        Self::new(n, edges).expect("complete graph is valid")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 nodes");
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle is valid")
    }

    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i))).expect("path is valid")
    }

    /// Star with node 0 as the hub and `n - 1` leaves.
    pub fn star(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (0, i))).expect("star is valid")
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Hop distances from `source`; unreachable nodes get [`UNREACHABLE`].
    pub fn bfs_distances(&self, source: usize) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.node_count()];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            for &v in &self.adj[u] {
                if dist[v] == UNREACHABLE {
                    dist[v] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn all_pairs_distances(&self) -> DistanceMatrix {
        let n = self.node_count();
        let mut data = Vec::with_capacity(n * n);
        for u in 0..n {
            data.extend(self.bfs_distances(u));
        }
        DistanceMatrix { n, data }
    }

    /// Relabels node `i` as `perm[i]`. `perm` must be a permutation of `0..n`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.node_count(), "permutation length mismatch");
        let edges: Vec<_> = self.edges().map(|(u, v)| (perm[u], perm[v])).collect();
        Self::new(self.node_count(), edges).expect("relabeling preserves validity")
    }

    /// Node-induced subgraph on `nodes` (order defines the new labels). Fails if the
    /// induced subgraph is disconnected.
    pub fn induced(&self, nodes: &[usize]) -> Result<Self, GraphError> {
        let mut index = vec![usize::MAX; self.node_count()];
        for (i, &u) in nodes.iter().enumerate() {
            index[u] = i;
        }
        let mut edges = Vec::new();
        for (i, &u) in nodes.iter().enumerate() {
            for &v in &self.adj[u] {
                let j = index[v];
                if j != usize::MAX && i < j {
                    edges.push((i, j));
                }
            }
        }
        Self::new(nodes.len(), edges)
    }
}

/// `|E| / |V|`, the linear edge density used for binning.
pub fn linear_density(g: &Graph) -> f64 {
    g.edge_count() as f64 / g.node_count() as f64
}

/// Dense all-pairs hop-distance matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<u32>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, u: usize, v: usize) -> u32 {
        self.data[u * self.n + v]
    }

    pub fn row(&self, u: usize) -> &[u32] {
        &self.data[u * self.n..(u + 1) * self.n]
    }

    pub fn diameter(&self) -> u32 {
        self.data.iter().copied().filter(|&d| d != UNREACHABLE).max().unwrap_or(0)
    }
}

fn count_components(adj: &[Vec<usize>]) -> usize {
    component_labels(adj).1
}

/// Component id per node (ids in order of smallest member) and the component count.
pub fn component_labels(adj: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let n = adj.len();
    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    let mut stack = Vec::new();
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = count;
        stack.push(s);
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if label[v] == usize::MAX {
                    label[v] = count;
                    stack.push(v);
                }
            }
        }
        count += 1;
    }
    (label, count)
}

/// Keeps the largest connected component of a simple edge set. Ties go to the
/// component containing the smallest node index. Returns the component as a graph
/// plus the original index of each new node.
pub fn largest_component(node_count: usize, edges: &[(usize, usize)]) -> Result<(Graph, Vec<usize>), GraphError> {
    if node_count == 0 {
        return Err(GraphError::Empty);
    }
    let mut adj = vec![Vec::new(); node_count];
    for &(u, v) in edges {
        if u >= node_count || v >= node_count {
            return Err(GraphError::NodeOutOfRange(u, v, node_count));
        }
        adj[u].push(v);
        adj[v].push(u);
    }
    let (label, count) = component_labels(&adj);
    let mut sizes = vec![0usize; count];
    for &l in &label {
        sizes[l] += 1;
    }
    let best = (0..count).max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a))).unwrap_or(0);
    let members: Vec<usize> = (0..node_count).filter(|&u| label[u] == best).collect();
    let mut index = vec![usize::MAX; node_count];
    for (i, &u) in members.iter().enumerate() {
        index[u] = i;
    }
    let kept = edges.iter().filter(|&&(u, _)| label[u] == best).map(|&(u, v)| (index[u], index[v]));
    let g = Graph::new(members.len(), kept)?;
    Ok((g, members))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_edges() {
        assert_eq!(Graph::new(3, [(0, 0), (1, 2)]), Err(GraphError::SelfLoop(0)));
        assert_eq!(Graph::new(3, [(0, 1), (1, 0), (1, 2)]), Err(GraphError::ParallelEdge(0, 1)));
        assert_eq!(Graph::new(2, [(0, 5)]), Err(GraphError::NodeOutOfRange(0, 5, 2)));
        assert_eq!(Graph::new(4, [(0, 1), (2, 3)]), Err(GraphError::Disconnected(2)));
        assert_eq!(Graph::new(0, []), Err(GraphError::Empty));
    }

    #[test]
    fn single_node_is_connected() {
        let g = Graph::new(1, []).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn linear_density_examples() {
        assert_eq!(linear_density(&Graph::cycle(10)), 1.0);
        assert_eq!(linear_density(&Graph::complete(4)), 1.5);
        assert_eq!(linear_density(&Graph::star(5)), 0.8);
    }

    #[test]
    fn distances_on_path() {
        let d = Graph::path(4).all_pairs_distances();
        assert_eq!(d.get(0, 3), 3);
        assert_eq!(d.diameter(), 3);
    }

    #[test]
    fn largest_component_keeps_biggest_piece() {
        let (g, map) = largest_component(6, &[(0, 1), (2, 3), (3, 4), (4, 2)]).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(map, vec![2, 3, 4]);
    }

    #[test]
    fn permutation_preserves_degree_multiset() {
        let g = Graph::star(5);
        let p = g.permuted(&[4, 3, 2, 1, 0]);
        assert_eq!(p.degree(4), 4);
        let mut a = g.degrees();
        let mut b = p.degrees();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
    }

    #[test]
    fn serde_round_trip_validates() {
        let g = Graph::cycle(5);
        let json = serde_json::to_string(&g).unwrap();
        let back: Graph = serde_json::from_str(&json).unwrap();
        assert_eq!(g, back);
        assert!(serde_json::from_str::<Graph>(r#"{"nodes":3,"edges":[[0,1]]}"#).is_err());
    }
}
