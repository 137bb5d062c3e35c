//! Core graph model for the graph-similarity perception benchmark.
//!
//! Everything downstream (layouts, measures, triplets) consumes [`Graph`]: a simple,
//! undirected, unweighted graph with exactly one connected component. This crate also
//! owns stimulus binning, the four synthetic generators, dynamic-log slicing for
//! real-world snapshots, the catalog manifest, and the judgment record schema.

pub mod bins;
pub mod catalog;
pub mod dynamic;
pub mod error;
pub mod generators;
pub mod graph;
pub mod io;
pub mod record;
pub mod seed;
pub mod store;

pub use bins::{DensityBin, GeneratorKind, LayoutKind, SizeBin, SourceKind, StimulusSpec};
pub use error::{GenerateError, GraphError};
pub use graph::{linear_density, Graph};
pub use record::{Choice, JudgmentRecord, RecordStatus};
