#![allow(dead_code)]

use std::path::PathBuf;

use graphsim_cli::layout::write_atomic;
use graphsim_cli::{Overrides, Pipeline, RunConfig};
use graphsim_core::catalog::{synthetic_stimulus, Catalog};
use graphsim_core::io::format_edge_list;
use graphsim_core::{DensityBin, GeneratorKind, LayoutKind, SizeBin};

pub const CONFIG: &str = r#"
seed = 11
participants = 2
coverage = "available"
stimulus_canvas = 256
align_canvas = 256
resamples = 100

[[providers]]
provider = "mock"
model_name = "mock-vision"
"#;

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub config: PathBuf,
}

impl Fixture {
    pub fn pipeline(&self, force: bool) -> Pipeline {
        Pipeline::new(RunConfig::load(&self.config, &Overrides::default()).unwrap(), force)
    }

    pub fn out(&self) -> PathBuf {
        self.dir.path().join("out")
    }
}

/// A catalog over the six small synthetic sparse and dense cells, three replicates per generator, with its
/// edge lists already written.
pub fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("graphsim.toml");
    std::fs::write(&config, CONFIG).unwrap();
    let out = dir.path().join("out");
    let mut catalog = Catalog { seed: 11, ..Catalog::default() };
    for (density, layout) in [DensityBin::Sparse, DensityBin::Dense].into_iter().flat_map(|d| LayoutKind::ALL.map(|l| (d, l))) {
        for g in GeneratorKind::ALL {
            for rep in 0..3 {
                let (entry, graph) = synthetic_stimulus(g, SizeBin::Small, density, layout, rep, 11).unwrap();
                write_atomic(&out.join("graphs").join(format!("{}.txt", entry.stimulus_id)), format_edge_list(&graph).as_bytes()).unwrap();
                catalog.stimuli.push(entry);
            }
        }
    }
    write_atomic(&out.join("catalog.json"), catalog.to_json().as_bytes()).unwrap();
    Fixture { dir, config }
}

/// Fixture with sessions, stimuli and aligned images in place.
pub fn prepared() -> Fixture {
    let f = fixture();
    let p = f.pipeline(false);
    p.render().unwrap();
    p.triplets().unwrap();
    p.align().unwrap();
    f
}
