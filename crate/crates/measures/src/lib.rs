//! Unknown-node-correspondence graph similarity measures, each normalized to [0, 1].
//!
//! Per-graph intermediate results (distances, spectra, orbit counts, ...) are cached
//! in a [`GraphContext`] so a graph compared against many others is analysed once.

pub mod alignment;
pub mod attributes;
pub mod canon;
pub mod feather;
pub mod graphlets;
pub mod grasp;
pub mod kernels;
pub mod louvain;
pub mod netdis;
pub mod netsimile;
pub mod orbits;
pub mod portrait;
pub mod regal;
pub mod spectral;
pub mod stats;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use graphsim_core::graph::DistanceMatrix;
use graphsim_core::Graph;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use louvain::{louvain_partition, modularity, Partition};

/// How a measure's raw output maps to a similarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationKind {
    AlreadySimilarity,
    BoundedDistance,
    UnboundedDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureId {
    SizeBalance,
    DensityBalance,
    DegreeDivergence,
    CommunityDivergence,
    Netsimile,
    PortraitDivergence,
    LaplacianSpectral,
    Feather,
    IpsenMikhailov,
    Netlsd,
    Gcd11,
    Netdis,
    Regal,
    Grasp,
    SpKernel,
    WlKernel,
}

impl MeasureId {
    pub const ALL: [MeasureId; 16] = [
        MeasureId::SizeBalance,
        MeasureId::DensityBalance,
        MeasureId::DegreeDivergence,
        MeasureId::CommunityDivergence,
        MeasureId::Netsimile,
        MeasureId::PortraitDivergence,
        MeasureId::LaplacianSpectral,
        MeasureId::Feather,
        MeasureId::IpsenMikhailov,
        MeasureId::Netlsd,
        MeasureId::Gcd11,
        MeasureId::Netdis,
        MeasureId::Regal,
        MeasureId::Grasp,
        MeasureId::SpKernel,
        MeasureId::WlKernel,
    ];

    /// The four measures comparing scalar or distributional graph attributes.
    pub const ATTRIBUTES: [MeasureId; 4] =
        [MeasureId::SizeBalance, MeasureId::DensityBalance, MeasureId::DegreeDivergence, MeasureId::CommunityDivergence];

    pub fn kind(self) -> NormalizationKind {
        use MeasureId::*;
        match self {
            SizeBalance | DensityBalance | DegreeDivergence | CommunityDivergence | SpKernel | WlKernel => {
                NormalizationKind::AlreadySimilarity
            }
            PortraitDivergence | IpsenMikhailov | Netdis => NormalizationKind::BoundedDistance,
            Netsimile | LaplacianSpectral | Feather | Netlsd | Gcd11 | Regal | Grasp => NormalizationKind::UnboundedDistance,
        }
    }

    pub fn as_str(self) -> &'static str {
        use MeasureId::*;
        match self {
            SizeBalance => "size_balance",
            DensityBalance => "density_balance",
            DegreeDivergence => "degree_divergence",
            CommunityDivergence => "community_divergence",
            Netsimile => "netsimile",
            PortraitDivergence => "portrait_divergence",
            LaplacianSpectral => "laplacian_spectral",
            Feather => "feather",
            IpsenMikhailov => "ipsen_mikhailov",
            Netlsd => "netlsd",
            Gcd11 => "gcd11",
            Netdis => "netdis",
            Regal => "regal",
            Grasp => "grasp",
            SpKernel => "sp_kernel",
            WlKernel => "wl_kernel",
        }
    }

    /// Minimum node count accepted by the measure.
    pub fn min_nodes(self) -> usize {
        match self {
            MeasureId::Gcd11 => 3,
            MeasureId::Netdis => netdis::MIN_NODES,
            _ => 1,
        }
    }
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeasureId {
    type Err = MeasureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MeasureId::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| MeasureError::UnknownMeasure(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeasureError {
    #[error("{measure} needs at least {required} nodes, graph has {found}")]
    TooSmall { measure: MeasureId, required: usize, found: usize },
    #[error("raw value {raw} is outside the valid range for {kind:?}")]
    OutOfRange { raw: f64, kind: NormalizationKind },
    #[error("unknown measure `{0}`")]
    UnknownMeasure(String),
    #[error("invalid measure configuration: {0}")]
    InvalidConfig(String),
    #[error("score table line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Slack allowed when checking ranges, to absorb floating-point round-off.
const RANGE_SLACK: f64 = 1e-9;

/// Maps a raw measure output to a similarity in [0, 1].
pub fn normalize_to_similarity(raw: f64, kind: NormalizationKind) -> Result<f64, MeasureError> {
    let err = || MeasureError::OutOfRange { raw, kind };
    if raw.is_nan() {
        return Err(err());
    }
    match kind {
        NormalizationKind::AlreadySimilarity | NormalizationKind::BoundedDistance => {
            if !(-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&raw) {
                return Err(err());
            }
            let raw = raw.clamp(0.0, 1.0);
            Ok(if kind == NormalizationKind::BoundedDistance { 1.0 - raw } else { raw })
        }
        NormalizationKind::UnboundedDistance => {
            if raw < -RANGE_SLACK || raw.is_infinite() {
                return Err(err());
            }
            Ok(1.0 / (1.0 + raw.max(0.0)))
        }
    }
}

/// Tunable parameters of the measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeasureConfig {
    pub seed: u64,
    pub wl_iterations: usize,
    pub netdis_max_graphlet: usize,
    pub netlsd_points: usize,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            seed: 0,
            wl_iterations: kernels::DEFAULT_WL_ITERATIONS,
            netdis_max_graphlet: netdis::DEFAULT_MAX_GRAPHLET,
            netlsd_points: spectral::NETLSD_POINTS,
        }
    }
}

impl MeasureConfig {
    pub fn with_seed(seed: u64) -> Self {
        MeasureConfig { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), MeasureError> {
        if self.wl_iterations == 0 {
            return Err(MeasureError::InvalidConfig("wl_iterations must be at least 1".into()));
        }
        if !(netdis::MIN_GRAPHLET..=graphlets::MAX_GRAPHLET).contains(&self.netdis_max_graphlet) {
            return Err(MeasureError::InvalidConfig(format!(
                "netdis_max_graphlet must lie in {}..={}",
                netdis::MIN_GRAPHLET,
                graphlets::MAX_GRAPHLET
            )));
        }
        if self.netlsd_points == 0 {
            return Err(MeasureError::InvalidConfig("netlsd_points must be positive".into()));
        }
        Ok(())
    }
}

/// A graph plus lazily computed per-graph intermediates.
#[derive(Debug)]
pub struct GraphContext {
    id: String,
    graph: Graph,
    distances: OnceLock<DistanceMatrix>,
    laplacian: OnceLock<Vec<f64>>,
    normalized: OnceLock<spectral::Eigen>,
    portrait: OnceLock<portrait::Portrait>,
    sp_histogram: OnceLock<BTreeMap<u32, u64>>,
    gcd11: OnceLock<Vec<f64>>,
    netsimile: OnceLock<Vec<f64>>,
    feather: OnceLock<Vec<f64>>,
    netdis: Mutex<HashMap<usize, Arc<Vec<netdis::CentredCounts>>>>,
    communities: Mutex<HashMap<u64, Arc<Vec<usize>>>>,
}

impl GraphContext {
    pub fn new(graph: Graph) -> Self {
        Self::with_id("", graph)
    }

    pub fn with_id(id: impl Into<String>, graph: Graph) -> Self {
        GraphContext {
            id: id.into(),
            graph,
            distances: OnceLock::new(),
            laplacian: OnceLock::new(),
            normalized: OnceLock::new(),
            portrait: OnceLock::new(),
            sp_histogram: OnceLock::new(),
            gcd11: OnceLock::new(),
            netsimile: OnceLock::new(),
            feather: OnceLock::new(),
            netdis: Mutex::new(HashMap::new()),
            communities: Mutex::new(HashMap::new()),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn distances(&self) -> &DistanceMatrix {
        self.distances.get_or_init(|| self.graph.all_pairs_distances())
    }

    pub fn laplacian_spectrum(&self) -> &[f64] {
        self.laplacian.get_or_init(|| spectral::laplacian_spectrum(&self.graph))
    }

    pub fn normalized_eigen(&self) -> &spectral::Eigen {
        self.normalized.get_or_init(|| spectral::normalized_laplacian_eigen(&self.graph))
    }

    pub fn portrait(&self) -> &portrait::Portrait {
        self.portrait.get_or_init(|| portrait::portrait_from_distances(self.distances()))
    }

    fn sp_histogram(&self) -> &BTreeMap<u32, u64> {
        self.sp_histogram.get_or_init(|| kernels::sp_histogram(self.distances()))
    }

    fn gcd11(&self) -> &[f64] {
        self.gcd11.get_or_init(|| orbits::gcd11_signature(&orbits::orbit_counts(&self.graph)))
    }

    fn netsimile(&self) -> &[f64] {
        self.netsimile.get_or_init(|| netsimile::netsimile_signature(&self.graph))
    }

    fn feather(&self) -> &[f64] {
        self.feather.get_or_init(|| feather::feather_embedding(&self.graph))
    }

    fn netdis(&self, max_k: usize) -> Arc<Vec<netdis::CentredCounts>> {
        if let Some(c) = self.netdis.lock().expect("netdis cache").get(&max_k) {
            return Arc::clone(c);
        }
        let counts = Arc::new(netdis::netdis_counts(&self.graph, max_k));
        self.netdis.lock().expect("netdis cache").insert(max_k, Arc::clone(&counts));
        counts
    }

    /// Louvain community sizes for a seed.
    pub fn community_sizes(&self, seed: u64) -> Arc<Vec<usize>> {
        if let Some(c) = self.communities.lock().expect("community cache").get(&seed) {
            return Arc::clone(c);
        }
        let sizes = Arc::new(louvain_partition(&self.graph, seed).sizes());
        self.communities.lock().expect("community cache").insert(seed, Arc::clone(&sizes));
        sizes
    }
}

/// Raw output of a measure: a similarity or a distance depending on its kind.
pub fn raw_value(measure: MeasureId, c1: &GraphContext, c2: &GraphContext, cfg: &MeasureConfig) -> Result<f64, MeasureError> {
    cfg.validate()?;
    for c in [c1, c2] {
        let n = c.graph.node_count();
        if n < measure.min_nodes() {
            return Err(MeasureError::TooSmall { measure, required: measure.min_nodes(), found: n });
        }
    }
    let (g1, g2) = (&c1.graph, &c2.graph);
    Ok(match measure {
        MeasureId::SizeBalance => attributes::size_balance(g1, g2),
        MeasureId::DensityBalance => attributes::density_balance(g1, g2),
        MeasureId::DegreeDivergence => attributes::degree_divergence(g1, g2),
        MeasureId::CommunityDivergence => attributes::multiset_jaccard(&c1.community_sizes(cfg.seed), &c2.community_sizes(cfg.seed)),
        MeasureId::Netsimile => netsimile::canberra(c1.netsimile(), c2.netsimile()),
        MeasureId::PortraitDivergence => portrait::portrait_divergence_raw(c1.portrait(), c2.portrait()),
        MeasureId::LaplacianSpectral => spectral::laplacian_spectral_distance(c1.laplacian_spectrum(), c2.laplacian_spectrum()),
        MeasureId::Feather => spectral::euclidean(c1.feather(), c2.feather()),
        MeasureId::IpsenMikhailov => spectral::ipsen_mikhailov(c1.laplacian_spectrum(), c2.laplacian_spectrum()),
        MeasureId::Netlsd => spectral::euclidean(
            &spectral::netlsd_signature(&c1.normalized_eigen().values, cfg.netlsd_points),
            &spectral::netlsd_signature(&c2.normalized_eigen().values, cfg.netlsd_points),
        ),
        MeasureId::Gcd11 => spectral::euclidean(c1.gcd11(), c2.gcd11()),
        MeasureId::Netdis => netdis::netdis_raw(&c1.netdis(cfg.netdis_max_graphlet), &c2.netdis(cfg.netdis_max_graphlet)),
        MeasureId::Regal => regal::regal_distance(g1, g2, cfg.seed),
        MeasureId::Grasp => grasp::grasp_distance(c1.normalized_eigen(), c2.normalized_eigen()),
        MeasureId::SpKernel => kernels::sp_kernel_from_histograms(c1.sp_histogram(), c2.sp_histogram()),
        MeasureId::WlKernel => kernels::wl_kernel(g1, g2, cfg.wl_iterations),
    })
}

/// Raw and normalized score of one measure on one graph pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureScore {
    pub measure: MeasureId,
    pub pair: (String, String),
    pub raw: f64,
    pub similarity: f64,
}

pub fn score(measure: MeasureId, c1: &GraphContext, c2: &GraphContext, cfg: &MeasureConfig) -> Result<MeasureScore, MeasureError> {
    let raw = raw_value(measure, c1, c2, cfg)?;
    let similarity = normalize_to_similarity(raw, measure.kind())?;
    Ok(MeasureScore { measure, pair: (c1.id.clone(), c2.id.clone()), raw, similarity })
}

/// One-off comparison of two graphs with default parameters and the given seed.
pub fn pairwise_similarity(measure: MeasureId, g1: &Graph, g2: &Graph, seed: u64) -> Result<MeasureScore, MeasureError> {
    let c1 = GraphContext::with_id("g1", g1.clone());
    let c2 = GraphContext::with_id("g2", g2.clone());
    score(measure, &c1, &c2, &MeasureConfig::with_seed(seed))
}

/// Scores every (pair, measure) combination in parallel; output order follows
/// `pairs` then `measures` regardless of scheduling.
pub fn score_pairs(
    contexts: &HashMap<String, GraphContext>,
    pairs: &[(String, String)],
    measures: &[MeasureId],
    cfg: &MeasureConfig,
) -> Result<Vec<MeasureScore>, MeasureError> {
    let lookup = |id: &String| contexts.get(id).ok_or_else(|| MeasureError::InvalidConfig(format!("no graph with id `{id}`")));
    let jobs: Vec<(&(String, String), MeasureId)> = pairs.iter().flat_map(|p| measures.iter().map(move |&m| (p, m))).collect();
    jobs.par_iter().map(|((a, b), m)| score(*m, lookup(a)?, lookup(b)?, cfg)).collect()
}

pub const SCORE_COLUMNS: [&str; 5] = ["measure", "graph_a", "graph_b", "raw", "similarity"];

/// Writes scores as tab-separated text with a header row.
pub fn write_scores_tsv<W: Write>(mut out: W, scores: &[MeasureScore]) -> std::io::Result<()> {
    writeln!(out, "{}", SCORE_COLUMNS.join("\t"))?;
    for s in scores {
        writeln!(out, "{}\t{}\t{}\t{}\t{}", s.measure, s.pair.0, s.pair.1, s.raw, s.similarity)?;
    }
    Ok(())
}

/// Parses the output of [`write_scores_tsv`].
pub fn read_scores_tsv(text: &str) -> Result<Vec<MeasureScore>, MeasureError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == SCORE_COLUMNS.join("\t") => {}
        _ => return Err(MeasureError::Parse { line: 1, message: "missing header".into() }),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let bad = |message: String| MeasureError::Parse { line: i + 1, message };
            let cols: Vec<&str> = l.split('\t').collect();
            let [measure, a, b, raw, sim] = cols[..] else {
                return Err(bad(format!("expected 5 columns, found {}", cols.len())));
            };
            let num = |v: &str| v.parse::<f64>().map_err(|e| bad(format!("{v:?}: {e}")));
            Ok(MeasureScore { measure: measure.parse()?, pair: (a.to_string(), b.to_string()), raw: num(raw)?, similarity: num(sim)? })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_table_round_trip() {
        let scores = vec![
            MeasureScore { measure: MeasureId::Netlsd, pair: ("a".into(), "b".into()), raw: 0.1 + 0.2, similarity: 1.0 / 1.3 },
            MeasureScore { measure: MeasureId::WlKernel, pair: ("a".into(), "c".into()), raw: 1e-17, similarity: 1e-17 },
        ];
        let mut buf = Vec::new();
        write_scores_tsv(&mut buf, &scores).unwrap();
        assert_eq!(read_scores_tsv(std::str::from_utf8(&buf).unwrap()).unwrap(), scores);
        assert!(matches!(read_scores_tsv("nope"), Err(MeasureError::Parse { line: 1, .. })));
    }

    #[test]
    fn normalization_rules() {
        assert_eq!(normalize_to_similarity(0.25, NormalizationKind::BoundedDistance), Ok(0.75));
        assert_eq!(normalize_to_similarity(3.0, NormalizationKind::UnboundedDistance), Ok(0.25));
        assert_eq!(normalize_to_similarity(0.0, NormalizationKind::BoundedDistance), Ok(1.0));
        assert_eq!(normalize_to_similarity(0.0, NormalizationKind::UnboundedDistance), Ok(1.0));
        assert!(normalize_to_similarity(1.5, NormalizationKind::BoundedDistance).is_err());
        assert!(normalize_to_similarity(-1.0, NormalizationKind::UnboundedDistance).is_err());
        assert!(normalize_to_similarity(f64::NAN, NormalizationKind::AlreadySimilarity).is_err());
    }

    #[test]
    fn ids_round_trip() {
        assert_eq!(MeasureId::ALL.len(), 16);
        for m in MeasureId::ALL {
            assert_eq!(m.as_str().parse::<MeasureId>(), Ok(m));
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{m}\""));
        }
    }

    #[test]
    fn config_validation() {
        assert!(MeasureConfig::default().validate().is_ok());
        let bad = MeasureConfig { netdis_max_graphlet: 6, ..MeasureConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn laplacian_p3_k3() {
        let s = pairwise_similarity(MeasureId::LaplacianSpectral, &Graph::path(3), &Graph::complete(3), 0).unwrap();
        assert!((s.raw - 2.0).abs() < 1e-9);
        assert!((s.similarity - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn too_small_graphs_are_rejected() {
        let err = pairwise_similarity(MeasureId::Netdis, &Graph::path(4), &Graph::path(6), 0).unwrap_err();
        assert!(matches!(err, MeasureError::TooSmall { required: 5, found: 4, .. }));
    }
}
