//! The four synthetic generator families (GNM, Barabási–Albert, Newman–Watts–Strogatz,
//! stochastic block model), parameter solving from a target density, and the
//! catalog-level loop that produces bin-compliant stimulus graphs.

use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::bins::{sample_spec_instance, DensityBin, GeneratorKind, SizeBin, SourceKind};
use crate::error::{GenerateError, GraphError};
use crate::graph::{linear_density, Graph};
use crate::seed;

/// Default number of connectivity resamples before a generator gives up.
pub const DEFAULT_RETRY_BUDGET: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum GeneratorParams {
    Gnm { n: usize, m: usize },
    Ba { n: usize, attach: f64 },
    Nws { n: usize, k: usize, p: f64 },
    Sbm { block_sizes: Vec<usize>, p_in: f64, p_out: f64 },
}

impl GeneratorParams {
    pub fn kind(&self) -> GeneratorKind {
        match self {
            GeneratorParams::Gnm { .. } => GeneratorKind::Gnm,
            GeneratorParams::Ba { .. } => GeneratorKind::Ba,
            GeneratorParams::Nws { .. } => GeneratorKind::Nws,
            GeneratorParams::Sbm { .. } => GeneratorKind::Sbm,
        }
    }

    pub fn generate(&self, seed: u64, retry_budget: usize) -> Result<Graph, GenerateError> {
        match self {
            GeneratorParams::Gnm { n, m } => gen_gnm_with_budget(*n, *m, seed, retry_budget),
            GeneratorParams::Ba { n, attach } => gen_ba(*n, *attach, seed),
            GeneratorParams::Nws { n, k, p } => gen_nws(*n, *k, *p, seed),
            GeneratorParams::Sbm { block_sizes, p_in, p_out } => gen_sbm_with_budget(block_sizes, *p_in, *p_out, seed, retry_budget),
        }
    }
}

fn max_edges(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Uniform random graph with exactly `m` edges, resampled until connected.
pub fn gen_gnm(n: usize, m: usize, seed: u64) -> Result<Graph, GenerateError> {
    gen_gnm_with_budget(n, m, seed, DEFAULT_RETRY_BUDGET)
}

pub fn gen_gnm_with_budget(n: usize, m: usize, seed: u64, retry_budget: usize) -> Result<Graph, GenerateError> {
    if n == 0 {
        return Err(GenerateError::Infeasible("n must be positive".into()));
    }
    if m > max_edges(n) {
        return Err(GenerateError::Infeasible(format!("m={m} exceeds {} possible edges", max_edges(n))));
    }
    if m + 1 < n {
        return Err(GenerateError::Infeasible(format!("m={m} is below the spanning-tree minimum {}", n - 1)));
    }
    // Row offsets for mapping a flat pair index back to (i, j), i < j.
    let offsets: Vec<usize> = (0..n)
        .scan(0, |acc, i| {
            let start = *acc;
            *acc += n - 1 - i;
            Some(start)
        })
        .collect();
    let mut rng = seed::rng(seed);
    for _ in 0..retry_budget.max(1) {
        let mut picks = index::sample(&mut rng, max_edges(n), m).into_vec();
        picks.sort_unstable();
        let mut row = 0;
        let edges: Vec<(usize, usize)> = picks
            .into_iter()
            .map(|p| {
                while row + 1 < n && offsets[row + 1] <= p {
                    row += 1;
                }
                (row, row + 1 + (p - offsets[row]))
            })
            .collect();
        match Graph::new(n, edges) {
            Ok(g) => return Ok(g),
            Err(GraphError::Disconnected(_)) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(GenerateError::RetryBudgetExhausted(retry_budget))
}

/// Preferential attachment with a possibly fractional attachment count.
///
/// Starts from a star on `ceil(attach) + 1` nodes; every later node attaches to
/// `floor(attach)` or `ceil(attach)` distinct existing nodes (ceil with probability equal
/// to the fractional part) chosen proportionally to degree. Connected by construction.
pub fn gen_ba(n: usize, attach: f64, seed: u64) -> Result<Graph, GenerateError> {
    if !(attach >= 1.0 && attach < n as f64) {
        return Err(GenerateError::Infeasible(format!("attach={attach} must lie in [1, {n})")));
    }
    let mut rng = seed::rng(seed);
    let initial = ba_initial_size(attach, n);
    let mut edges: Vec<(usize, usize)> = (1..initial).map(|i| (0, i)).collect();
    // Each node appears once per incident edge endpoint: degree-proportional sampling.
    let mut endpoints: Vec<usize> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    let base = attach.floor() as usize;
    let frac = attach - attach.floor();
    let mut targets = Vec::new();
    for t in initial..n {
        let mut k = base + usize::from(rng.random::<f64>() < frac);
        k = k.min(t);
        targets.clear();
        while targets.len() < k {
            let cand = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&cand) {
                targets.push(cand);
            }
        }
        for &v in &targets {
            edges.push((v, t));
            endpoints.push(v);
            endpoints.push(t);
        }
    }
    Ok(Graph::new(n, edges)?)
}

fn ba_initial_size(attach: f64, n: usize) -> usize {
    (attach.ceil() as usize + 1).min(n)
}

/// Expected edge count of [`gen_ba`].
pub fn ba_expected_edges(n: usize, attach: f64) -> f64 {
    let initial = ba_initial_size(attach, n);
    (initial - 1) as f64 + (n - initial) as f64 * attach
}

/// Ring lattice over `n` nodes joined to their `k` nearest neighbours, plus one shortcut
/// per lattice edge with probability `p`. Shortcuts are added, never rewired, so the
/// ring keeps the graph connected.
pub fn gen_nws(n: usize, k: usize, p: f64, seed: u64) -> Result<Graph, GenerateError> {
    if k < 2 || !k.is_multiple_of(2) || k >= n {
        return Err(GenerateError::Infeasible(format!("k={k} must be even with 2 <= k < n={n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(GenerateError::Infeasible(format!("p={p} is not a probability")));
    }
    let mut rng = seed::rng(seed);
    let mut adj = vec![std::collections::BTreeSet::new(); n];
    let mut lattice = Vec::with_capacity(n * k / 2);
    for j in 1..=k / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
            lattice.push((u, v));
        }
    }
    for &(u, _) in &lattice {
        if rng.random::<f64>() < p {
            if adj[u].len() >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.random_range(0..n);
                if w != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    let edges = adj.iter().enumerate().flat_map(|(u, s)| s.iter().filter(move |&&v| v > u).map(move |&v| (u, v)));
    Ok(Graph::new(n, edges)?)
}

/// Stochastic block model with intra-block probability `p_in` and inter-block
/// probability `p_out`, resampled until connected.
pub fn gen_sbm(block_sizes: &[usize], p_in: f64, p_out: f64, seed: u64) -> Result<Graph, GenerateError> {
    gen_sbm_with_budget(block_sizes, p_in, p_out, seed, DEFAULT_RETRY_BUDGET)
}

pub fn gen_sbm_with_budget(block_sizes: &[usize], p_in: f64, p_out: f64, seed: u64, retry_budget: usize) -> Result<Graph, GenerateError> {
    let n: usize = block_sizes.iter().sum();
    if n == 0 || block_sizes.contains(&0) {
        return Err(GenerateError::Infeasible("blocks must be non-empty".into()));
    }
    if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) || p_in < p_out {
        return Err(GenerateError::Infeasible(format!("need 0 <= p_out={p_out} <= p_in={p_in} <= 1")));
    }
    let block: Vec<usize> = block_sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat_n(b, s)).collect();
    let mut rng = seed::rng(seed);
    for _ in 0..retry_budget.max(1) {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let p = if block[i] == block[j] { p_in } else { p_out };
                if rng.random::<f64>() < p {
                    edges.push((i, j));
                }
            }
        }
        match Graph::new(n, edges) {
            Ok(g) => return Ok(g),
            Err(GraphError::Disconnected(_)) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(GenerateError::RetryBudgetExhausted(retry_budget))
}

/// Share of expected SBM edges placed inside blocks when `p_in` is not saturated.
pub const SBM_INTRA_SHARE: f64 = 0.9;

/// Near-equal block sizes for `blocks` blocks over `n` nodes; larger blocks first.
pub fn near_equal_blocks(n: usize, blocks: usize) -> Vec<usize> {
    (0..blocks).map(|b| n / blocks + usize::from(b < n % blocks)).collect()
}

/// Chooses generator parameters whose expected linear density matches `density`.
///
/// GNM is exact (`m = round(n * density)`); BA solves the fractional attachment count
/// against the star seed; NWS takes `k = 2 * floor(density)` and the shortcut probability
/// covering the rest; SBM draws 2 to 4 near-equal blocks from `seed` and splits the
/// expected edges between intra- and inter-block pairs.
pub fn solve_generator_params(kind: GeneratorKind, n: usize, density: f64, seed: u64) -> Result<GeneratorParams, GenerateError> {
    if n < 2 || !(density.is_finite() && density > 0.0) {
        return Err(GenerateError::Infeasible(format!("n={n}, density={density}")));
    }
    let target_edges = density * n as f64;
    if target_edges > max_edges(n) as f64 {
        return Err(GenerateError::Infeasible(format!("density {density} exceeds the complete graph on {n} nodes")));
    }
    match kind {
        GeneratorKind::Gnm => {
            let m = target_edges.round() as usize;
            if m + 1 < n {
                return Err(GenerateError::Infeasible(format!("m={m} cannot connect {n} nodes")));
            }
            Ok(GeneratorParams::Gnm { n, m })
        }
        GeneratorKind::Ba => {
            // Expected edges: (initial - 1) + (n - initial) * attach, with initial = ceil(attach) + 1.
            for initial in 2..n {
                let attach = (target_edges - (initial - 1) as f64) / (n - initial) as f64;
                if attach >= 1.0 && attach < n as f64 && ba_initial_size(attach, n) == initial {
                    return Ok(GeneratorParams::Ba { n, attach });
                }
            }
            Err(GenerateError::Infeasible(format!("no attachment count reaches density {density} at n={n}")))
        }
        GeneratorKind::Nws => {
            let half = density.floor() as usize;
            let k = 2 * half;
            if half == 0 || k >= n {
                return Err(GenerateError::Infeasible(format!("k={k} infeasible for n={n}")));
            }
            let p = density / half as f64 - 1.0;
            Ok(GeneratorParams::Nws { n, k, p: p.clamp(0.0, 1.0) })
        }
        GeneratorKind::Sbm => {
            let mut rng = seed::rng(seed::derive(seed, "sbm-blocks"));
            let blocks = rng.random_range(2..=4usize).min(n / 2).max(2);
            let block_sizes = near_equal_blocks(n, blocks);
            let within: f64 = block_sizes.iter().map(|&b| max_edges(b) as f64).sum();
            let between = max_edges(n) as f64 - within;
            let p_in = (SBM_INTRA_SHARE * target_edges / within).min(1.0);
            let p_out = (target_edges - p_in * within) / between;
            if !(p_out >= 0.0 && p_out < p_in) {
                return Err(GenerateError::Infeasible(format!("SBM cannot keep p_in > p_out at density {density}")));
            }
            Ok(GeneratorParams::Sbm { block_sizes, p_in, p_out })
        }
    }
}

/// A bin-compliant synthetic graph with the parameters that produced it.
#[derive(Debug, Clone)]
pub struct SyntheticGraph {
    pub graph: Graph,
    pub params: GeneratorParams,
    pub target_nodes: usize,
    pub target_density: f64,
    pub draws: usize,
}

/// Connectivity resamples allowed per target draw inside [`generate_in_bins`].
pub const PER_DRAW_RETRIES: usize = 100;
/// Target draws allowed inside [`generate_in_bins`].
pub const MAX_TARGET_DRAWS: usize = 2000;

/// Produces a connected graph of `generator`'s family that lies inside both bins.
///
/// Each draw samples a fresh `(n, density)` target, solves parameters, and generates;
/// draws whose realized graph leaves the bins (or cannot be connected) are discarded.
pub fn generate_in_bins(generator: GeneratorKind, size: SizeBin, density: DensityBin, seed: u64) -> Result<SyntheticGraph, GenerateError> {
    let source = SourceKind::Synthetic { generator };
    for draw in 0..MAX_TARGET_DRAWS {
        let draw_seed = seed::derive_index(seed, draw as u64);
        let (n, d) = sample_spec_instance(size, density, &source, seed::derive(draw_seed, "target"))?;
        let params = match solve_generator_params(generator, n, d, seed::derive(draw_seed, "params")) {
            Ok(p) => p,
            Err(GenerateError::Infeasible(_)) => continue,
            Err(e) => return Err(e),
        };
        let graph = match params.generate(seed::derive(draw_seed, "graph"), PER_DRAW_RETRIES) {
            Ok(g) => g,
            Err(GenerateError::RetryBudgetExhausted(_)) | Err(GenerateError::Infeasible(_)) => continue,
            Err(e) => return Err(e),
        };
        if size.contains(graph.node_count()) && density.contains(linear_density(&graph)) {
            return Ok(SyntheticGraph { graph, params, target_nodes: n, target_density: d, draws: draw + 1 });
        }
    }
    Err(GenerateError::RetryBudgetExhausted(MAX_TARGET_DRAWS))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gnm_examples() {
        let g = gen_gnm(10, 15, 7).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (10, 15));
        assert_eq!(gen_gnm(4, 6, 99).unwrap(), Graph::complete(4));
        assert!(matches!(gen_gnm(10, 8, 1), Err(GenerateError::Infeasible(_))));
    }

    #[test]
    fn gnm_is_deterministic() {
        assert_eq!(gen_gnm(30, 50, 5).unwrap(), gen_gnm(30, 50, 5).unwrap());
        assert_ne!(gen_gnm(30, 50, 5).unwrap(), gen_gnm(30, 50, 6).unwrap());
    }

    #[test]
    fn ba_with_unit_attach_is_tree() {
        let g = gen_ba(5, 1.0, 3).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert!(gen_ba(5, 5.0, 3).is_err());
    }

    #[test]
    fn nws_pure_ring() {
        let g = gen_nws(10, 2, 0.0, 1).unwrap();
        assert_eq!(g, Graph::cycle(10));
        let g = gen_nws(10, 4, 0.0, 1).unwrap();
        assert_eq!(g.edge_count(), 20);
        assert!(g.degrees().iter().all(|&d| d == 4));
        assert!(gen_nws(10, 3, 0.0, 1).is_err());
        assert!(gen_nws(10, 10, 0.0, 1).is_err());
    }

    #[test]
    fn sbm_examples() {
        assert_eq!(gen_sbm(&[5, 5], 1.0, 1.0, 0).unwrap(), Graph::complete(10));
        assert!(matches!(gen_sbm_with_budget(&[3, 3], 1.0, 0.0, 0, 20), Err(GenerateError::RetryBudgetExhausted(20))));
        assert!(gen_sbm(&[3, 3], 1.0, 0.1, 0).is_ok());
    }

    #[test]
    fn solver_examples() {
        assert_eq!(solve_generator_params(GeneratorKind::Gnm, 100, 2.0, 0).unwrap(), GeneratorParams::Gnm { n: 100, m: 200 });
        assert_eq!(solve_generator_params(GeneratorKind::Nws, 100, 1.0, 0).unwrap(), GeneratorParams::Nws { n: 100, k: 2, p: 0.0 });
        let GeneratorParams::Ba { attach, .. } = solve_generator_params(GeneratorKind::Ba, 100, 2.5, 0).unwrap() else {
            panic!("wrong family")
        };
        assert!((ba_expected_edges(100, attach) / 100.0 - 2.5).abs() < 1e-9);
    }

    #[test]
    fn sbm_solver_hits_expected_density() {
        for s in 0..20 {
            let GeneratorParams::Sbm { block_sizes, p_in, p_out } = solve_generator_params(GeneratorKind::Sbm, 60, 2.5, s).unwrap() else {
                panic!("wrong family")
            };
            assert!((2..=4).contains(&block_sizes.len()));
            let within: f64 = block_sizes.iter().map(|&b| (b * (b - 1) / 2) as f64).sum();
            let expected = p_in * within + p_out * (60.0 * 59.0 / 2.0 - within);
            assert!((expected / 60.0 - 2.5).abs() < 1e-9);
            assert!(p_in > p_out);
        }
    }

    #[test]
    fn generate_in_bins_complies() {
        for (i, g) in GeneratorKind::ALL.into_iter().enumerate() {
            let out = generate_in_bins(g, SizeBin::Small, DensityBin::Dense, i as u64).unwrap();
            assert!(SizeBin::Small.contains(out.graph.node_count()));
            assert!(DensityBin::Dense.contains(linear_density(&out.graph)));
        }
    }
}
