//! The stimulus catalog manifest and synthetic catalog construction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bins::{is_reachable, DensityBin, GeneratorKind, LayoutKind, SizeBin, SourceKind, StimulusSpec};
use crate::error::GenerateError;
use crate::generators::{generate_in_bins, GeneratorParams};
use crate::graph::{linear_density, Graph};
use crate::seed;

/// Synthetic stimuli per (generator, size, density, layout) cell.
pub const DEFAULT_REPLICATES: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub stimulus_id: String,
    pub source: SourceKind,
    pub size_bin: SizeBin,
    pub density_bin: DensityBin,
    pub layout: LayoutKind,
    pub seed: u64,
    pub node_count: usize,
    pub edge_count: usize,
    /// Ground-truth visual cluster. Synthetic stimuli carry their generator family;
    /// real stimuli are labelled from an external manifest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<GeneratorParams>,
}

impl CatalogEntry {
    pub fn spec(&self) -> StimulusSpec {
        StimulusSpec {
            source: self.source.clone(),
            size_bin: self.size_bin,
            density_bin: self.density_bin,
            layout: self.layout,
            seed: self.seed,
        }
    }

    pub fn density(&self) -> f64 {
        self.edge_count as f64 / self.node_count as f64
    }
}

/// Rotation chosen for one target when presented next to its query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentRecord {
    pub triplet_id: String,
    pub target_id: String,
    pub rotation_degrees: u32,
    pub auc: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub seed: u64,
    pub stimuli: Vec<CatalogEntry>,
    #[serde(default)]
    pub alignments: Vec<AlignmentRecord>,
}

impl Catalog {
    pub fn get(&self, stimulus_id: &str) -> Option<&CatalogEntry> {
        self.stimuli.iter().find(|e| e.stimulus_id == stimulus_id)
    }

    pub fn index(&self) -> BTreeMap<&str, &CatalogEntry> {
        self.stimuli.iter().map(|e| (e.stimulus_id.as_str(), e)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("catalog serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

pub fn synthetic_id(g: GeneratorKind, size: SizeBin, density: DensityBin, layout: LayoutKind, rep: usize) -> String {
    format!("{}-{}-{}-{}-{rep:02}", g.as_str(), size.as_str(), density.as_str(), layout.as_str())
}

/// Builds one synthetic stimulus graph and its catalog entry.
pub fn synthetic_stimulus(
    generator: GeneratorKind,
    size: SizeBin,
    density: DensityBin,
    layout: LayoutKind,
    rep: usize,
    catalog_seed: u64,
) -> Result<(CatalogEntry, Graph), GenerateError> {
    let id = synthetic_id(generator, size, density, layout, rep);
    let stim_seed = seed::derive(catalog_seed, &id);
    let out = generate_in_bins(generator, size, density, stim_seed)?;
    let entry = CatalogEntry {
        stimulus_id: id,
        source: SourceKind::Synthetic { generator },
        size_bin: size,
        density_bin: density,
        layout,
        seed: stim_seed,
        node_count: out.graph.node_count(),
        edge_count: out.graph.edge_count(),
        cluster_label: Some(generator.as_str().to_string()),
        params: Some(out.params),
    };
    Ok((entry, out.graph))
}

/// Every synthetic stimulus of the full design: generators x bins x layouts x replicates.
pub fn synthetic_cells(replicates: usize) -> Vec<(GeneratorKind, SizeBin, DensityBin, LayoutKind, usize)> {
    let mut cells = Vec::new();
    for g in GeneratorKind::ALL {
        for s in SizeBin::ALL {
            for d in DensityBin::ALL {
                if !is_reachable(s, d, false) {
                    continue;
                }
                for l in LayoutKind::ALL {
                    for r in 0..replicates {
                        cells.push((g, s, d, l, r));
                    }
                }
            }
        }
    }
    cells
}

/// Builds the synthetic catalog and its graphs keyed by stimulus id.
pub fn build_synthetic_catalog(catalog_seed: u64, replicates: usize) -> Result<(Catalog, BTreeMap<String, Graph>), GenerateError> {
    let mut catalog = Catalog { seed: catalog_seed, ..Catalog::default() };
    let mut graphs = BTreeMap::new();
    for (g, s, d, l, r) in synthetic_cells(replicates) {
        let (entry, graph) = synthetic_stimulus(g, s, d, l, r, catalog_seed)?;
        graphs.insert(entry.stimulus_id.clone(), graph);
        catalog.stimuli.push(entry);
    }
    Ok((catalog, graphs))
}

/// Catalog entry for a real-world snapshot already reduced to one component.
/// Returns `None` when the snapshot lies outside every bin.
pub fn real_entry(
    stimulus_id: &str,
    dataset_id: &str,
    window: &str,
    layout: LayoutKind,
    graph: &Graph,
    catalog_seed: u64,
    cluster_label: Option<String>,
) -> Option<CatalogEntry> {
    let size_bin = SizeBin::classify(graph.node_count())?;
    let density_bin = DensityBin::classify(linear_density(graph))?;
    if !is_reachable(size_bin, density_bin, true) {
        return None;
    }
    Some(CatalogEntry {
        stimulus_id: stimulus_id.to_string(),
        source: SourceKind::Real { dataset_id: dataset_id.to_string(), window: window.to_string() },
        size_bin,
        density_bin,
        layout,
        seed: seed::derive(catalog_seed, stimulus_id),
        node_count: graph.node_count(),
        edge_count: graph.edge_count(),
        cluster_label,
        params: None,
    })
}
