use std::collections::BTreeMap;
use std::fmt;

use graphsim_core::bins::is_reachable;
use graphsim_core::catalog::Catalog;
use graphsim_core::{DensityBin, LayoutKind, SizeBin, SourceKind};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceType {
    Synthetic,
    Real,
}

impl SourceType {
    pub const ALL: [SourceType; 2] = [SourceType::Synthetic, SourceType::Real];

    pub fn of(source: &SourceKind) -> Self {
        if source.is_real() {
            SourceType::Real
        } else {
            SourceType::Synthetic
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SourceType::Synthetic => "synthetic",
            SourceType::Real => "real",
        }
    }
}

/// One condition cell: every stimulus of a triplet shares all four factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub source: SourceType,
    pub size: SizeBin,
    pub density: DensityBin,
    pub layout: LayoutKind,
}

impl Cell {
    /// All 72 combinations in canonical order (source, size, density, layout).
    pub fn all() -> Vec<Cell> {
        let mut cells = Vec::with_capacity(72);
        for source in SourceType::ALL {
            for size in SizeBin::ALL {
                for density in DensityBin::ALL {
                    for layout in LayoutKind::ALL {
                        cells.push(Cell { source, size, density, layout });
                    }
                }
            }
        }
        cells
    }

    /// Cells that the catalog's reachability rule allows.
    pub fn reachable() -> Vec<Cell> {
        Cell::all().into_iter().filter(|c| c.is_reachable()).collect()
    }

    pub fn is_reachable(&self) -> bool {
        is_reachable(self.size, self.density, self.source == SourceType::Real)
    }

    pub fn key(&self) -> String {
        self.to_string()
    }

    /// Key with `.` separators, safe inside identifiers and file names.
    pub fn slug(&self) -> String {
        self.key().replace('/', ".")
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}/{}", self.source.as_str(), self.size.as_str(), self.density.as_str(), self.layout.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusteredStimulus {
    pub stimulus_id: String,
    pub cluster_label: String,
    pub cell: Cell,
}

/// Real-stimulus cluster labels keyed by stimulus id.
pub type LabelManifest = BTreeMap<String, String>;

/// Synthetic stimuli take their generator family; real stimuli take their label from
/// the manifest and are rejected when it has none.
pub fn assign_clusters(catalog: &Catalog, labels: &LabelManifest) -> Result<Vec<ClusteredStimulus>, HarnessError> {
    catalog
        .stimuli
        .iter()
        .map(|e| {
            let cluster_label = match &e.source {
                SourceKind::Synthetic { generator } => generator.as_str().to_string(),
                SourceKind::Real { .. } => {
                    labels.get(&e.stimulus_id).cloned().ok_or_else(|| HarnessError::MissingLabel(e.stimulus_id.clone()))?
                }
            };
            Ok(ClusteredStimulus {
                stimulus_id: e.stimulus_id.clone(),
                cluster_label,
                cell: Cell { source: SourceType::of(&e.source), size: e.size_bin, density: e.density_bin, layout: e.layout },
            })
        })
        .collect()
}

/// Stimuli grouped by cell.
pub fn pools(stimuli: &[ClusteredStimulus]) -> BTreeMap<Cell, Vec<ClusteredStimulus>> {
    let mut out: BTreeMap<Cell, Vec<ClusteredStimulus>> = BTreeMap::new();
    for s in stimuli {
        out.entry(s.cell).or_default().push(s.clone());
    }
    out
}
