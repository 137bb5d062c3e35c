//! Independent variables of the stimulus design: size bin, density bin, layout and
//! data source, plus the Gaussian bin sampler.

use std::fmt;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::GenerateError;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeBin {
    Small,
    Medium,
    Large,
    VeryLarge,
}

impl SizeBin {
    pub const ALL: [SizeBin; 4] = [SizeBin::Small, SizeBin::Medium, SizeBin::Large, SizeBin::VeryLarge];

    /// Inclusive node-count range.
    pub fn range(self) -> (usize, usize) {
        match self {
            SizeBin::Small => (10, 20),
            SizeBin::Medium => (21, 50),
            SizeBin::Large => (51, 200),
            SizeBin::VeryLarge => (201, 400),
        }
    }

    pub fn contains(self, n: usize) -> bool {
        let (lo, hi) = self.range();
        (lo..=hi).contains(&n)
    }

    pub fn classify(n: usize) -> Option<SizeBin> {
        Self::ALL.into_iter().find(|b| b.contains(n))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SizeBin::Small => "small",
            SizeBin::Medium => "medium",
            SizeBin::Large => "large",
            SizeBin::VeryLarge => "very_large",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityBin {
    Sparse,
    Dense,
    VeryDense,
}

impl DensityBin {
    pub const ALL: [DensityBin; 3] = [DensityBin::Sparse, DensityBin::Dense, DensityBin::VeryDense];

    /// Bounds on linear density `|E|/|V|`. Sparse and dense are half-open `[lo, hi)`,
    /// very dense is closed `[3, 10]`.
    pub fn bounds(self) -> (f64, f64) {
        match self {
            DensityBin::Sparse => (1.0, 2.0),
            DensityBin::Dense => (2.0, 3.0),
            DensityBin::VeryDense => (3.0, 10.0),
        }
    }

    pub fn contains(self, d: f64) -> bool {
        let (lo, hi) = self.bounds();
        match self {
            DensityBin::VeryDense => d >= lo && d <= hi,
            _ => d >= lo && d < hi,
        }
    }

    pub fn classify(d: f64) -> Option<DensityBin> {
        Self::ALL.into_iter().find(|b| b.contains(d))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DensityBin::Sparse => "sparse",
            DensityBin::Dense => "dense",
            DensityBin::VeryDense => "very_dense",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GeneratorKind {
    #[serde(rename = "GNM")]
    Gnm,
    #[serde(rename = "BBA")]
    Ba,
    #[serde(rename = "NWS")]
    Nws,
    #[serde(rename = "SBM")]
    Sbm,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 4] = [GeneratorKind::Gnm, GeneratorKind::Ba, GeneratorKind::Nws, GeneratorKind::Sbm];

    /// Family name, which doubles as the ground-truth cluster label of synthetic stimuli.
    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorKind::Gnm => "GNM",
            GeneratorKind::Ba => "BBA",
            GeneratorKind::Nws => "NWS",
            GeneratorKind::Sbm => "SBM",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutKind {
    ForceDirected,
    Circular,
    Umap,
}

impl LayoutKind {
    pub const ALL: [LayoutKind; 3] = [LayoutKind::ForceDirected, LayoutKind::Circular, LayoutKind::Umap];

    pub fn as_str(self) -> &'static str {
        match self {
            LayoutKind::ForceDirected => "force_directed",
            LayoutKind::Circular => "circular",
            LayoutKind::Umap => "umap",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceKind {
    Synthetic { generator: GeneratorKind },
    Real { dataset_id: String, window: String },
}

impl SourceKind {
    pub fn is_real(&self) -> bool {
        matches!(self, SourceKind::Real { .. })
    }

    /// `"synthetic"` or `"real"`; the source-type factor of a condition cell.
    pub fn source_type(&self) -> &'static str {
        if self.is_real() {
            "real"
        } else {
            "synthetic"
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceKind::Synthetic { generator } => f.write_str(generator.as_str()),
            SourceKind::Real { dataset_id, window } => write!(f, "real:{dataset_id}:{window}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StimulusSpec {
    pub source: SourceKind,
    pub size_bin: SizeBin,
    pub density_bin: DensityBin,
    pub layout: LayoutKind,
    pub seed: u64,
}

/// Whether a (size, density) cell can be populated for the given source type.
/// Real snapshots never reach the very large and very dense cell.
pub fn is_reachable(size: SizeBin, density: DensityBin, real: bool) -> bool {
    !(real && size == SizeBin::VeryLarge && density == DensityBin::VeryDense)
}

/// Rejection-sampling attempt cap for one Gaussian draw; in-bin mass is ~95%, so this
/// is never reached in practice.
const MAX_DRAWS: usize = 10_000;

/// Draws a target `(node_count, linear_density)` for a bin pair.
///
/// Both values come from Gaussians centered on the bin medians with standard deviation
/// of a quarter of the bin width, resampled until they land inside the bin.
pub fn sample_spec_instance(size: SizeBin, density: DensityBin, source: &SourceKind, seed: u64) -> Result<(usize, f64), GenerateError> {
    if !is_reachable(size, density, source.is_real()) {
        return Err(GenerateError::Unreachable(size.as_str().into(), density.as_str().into()));
    }
    let mut rng = seed::rng(seed);
    let (lo, hi) = size.range();
    let size_dist = Normal::new((lo + hi) as f64 / 2.0, (hi - lo) as f64 / 4.0).expect("positive standard deviation");
    let n = (0..MAX_DRAWS)
        .map(|_| size_dist.sample(&mut rng).round())
        .find(|&x| x >= lo as f64 && x <= hi as f64)
        .ok_or_else(|| GenerateError::Infeasible("size sampling did not converge".into()))? as usize;
    let (dlo, dhi) = density.bounds();
    let density_dist = Normal::new((dlo + dhi) / 2.0, (dhi - dlo) / 4.0).expect("positive standard deviation");
    let d = (0..MAX_DRAWS)
        .map(|_| density_dist.sample(&mut rng))
        .find(|&x| density.contains(x))
        .ok_or_else(|| GenerateError::Infeasible("density sampling did not converge".into()))?;
    Ok((n, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GNM: SourceKind = SourceKind::Synthetic { generator: GeneratorKind::Gnm };

    #[test]
    fn small_sparse_lands_in_bins() {
        for s in 0..200 {
            let (n, d) = sample_spec_instance(SizeBin::Small, DensityBin::Sparse, &GNM, s).unwrap();
            assert!((10..=20).contains(&n));
            assert!((1.0..2.0).contains(&d));
        }
    }

    #[test]
    fn very_large_very_dense_rejected_for_real_sources() {
        let real = SourceKind::Real { dataset_id: "x".into(), window: "daily".into() };
        let err = sample_spec_instance(SizeBin::VeryLarge, DensityBin::VeryDense, &real, 3);
        assert!(matches!(err, Err(GenerateError::Unreachable(..))));
        assert!(sample_spec_instance(SizeBin::VeryLarge, DensityBin::VeryDense, &GNM, 3).is_ok());
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_spec_instance(SizeBin::Large, DensityBin::Dense, &GNM, 42).unwrap();
        let b = sample_spec_instance(SizeBin::Large, DensityBin::Dense, &GNM, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn density_bin_edges() {
        assert_eq!(DensityBin::classify(2.0), Some(DensityBin::Dense));
        assert_eq!(DensityBin::classify(10.0), Some(DensityBin::VeryDense));
        assert_eq!(DensityBin::classify(0.9), None);
        assert_eq!(SizeBin::classify(20), Some(SizeBin::Small));
        assert_eq!(SizeBin::classify(401), None);
    }
}
