//! The TOML run configuration.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use graphsim_core::dynamic::Window;
use graphsim_judge::ModelConfig;
use graphsim_measures::MeasureConfig;
use graphsim_render::raster::MIN_CANVAS;
use graphsim_render::STIMULUS_CANVAS;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Which condition cells every session must cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coverage {
    /// All 69 reachable cells; a missing pool is an error.
    #[default]
    Full,
    /// Only reachable cells the catalog can populate.
    Available,
}

/// A timestamped edge-event log sliced into snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealSource {
    pub dataset_id: String,
    pub path: PathBuf,
    pub window: Window,
    /// Cluster label for every snapshot of the dataset. Entries in the labels manifest
    /// take precedence.
    #[serde(default)]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ServeConfig {
    pub host: String,
    pub port: u16,
    /// Built study-UI bundle served at `/`.
    pub ui_dir: Option<PathBuf>,
    /// Advisory per-trial limit sent to the client.
    pub time_limit_s: u64,
}

impl Default for ServeConfig {
    fn default() -> Self {
        ServeConfig { host: "127.0.0.1".into(), port: 8080, ui_dir: None, time_limit_s: 60 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    #[serde(default = "default_output")]
    output_dir: PathBuf,
    catalog: Option<PathBuf>,
    labels: Option<PathBuf>,
    #[serde(default = "default_replicates")]
    replicates: usize,
    #[serde(default = "default_participants")]
    participants: usize,
    #[serde(default)]
    coverage: Coverage,
    #[serde(default = "default_stimulus_canvas")]
    stimulus_canvas: u32,
    #[serde(default = "default_align_canvas")]
    align_canvas: u32,
    #[serde(default = "default_resamples")]
    resamples: usize,
    #[serde(default)]
    measures: MeasureConfig,
    #[serde(default)]
    real: Vec<RealSource>,
    #[serde(default)]
    providers: Vec<ModelConfig>,
    #[serde(default)]
    serve: ServeConfig,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}
fn default_replicates() -> usize {
    graphsim_core::catalog::DEFAULT_REPLICATES
}
fn default_participants() -> usize {
    32
}
fn default_stimulus_canvas() -> u32 {
    STIMULUS_CANVAS
}
fn default_align_canvas() -> u32 {
    512
}
fn default_resamples() -> usize {
    graphsim_analysis::DEFAULT_RESAMPLES
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

/// A validated configuration with every path absolute.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub catalog_path: PathBuf,
    pub labels: Option<PathBuf>,
    pub replicates: usize,
    pub participants: usize,
    pub coverage: Coverage,
    pub stimulus_canvas: u32,
    /// Canvas the rotation search runs at; the chosen angle is applied at full size.
    pub align_canvas: u32,
    pub resamples: usize,
    pub measures: MeasureConfig,
    pub real: Vec<RealSource>,
    pub providers: Vec<ModelConfig>,
    pub serve: ServeConfig,
}

fn absolute(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let base = std::path::absolute(base).map_err(|e| CliError::io(base, e))?;
        Self::from_toml(&text, &base, overrides)
    }

    /// Parses `text`, resolving relative paths against `base`. The measure seed defaults
    /// to the global seed unless `[measures]` sets one.
    pub fn from_toml(text: &str, base: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let table: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let measure_seed_set = table.get("measures").and_then(|m| m.get("seed")).is_some();
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let seed = overrides.seed.or(raw.seed).ok_or_else(|| CliError::Config("seed is required (set `seed` or pass --seed)".into()))?;
        let cwd = std::env::current_dir().map_err(|e| CliError::io(Path::new("."), e))?;
        let output_dir = match &overrides.output_dir {
            Some(o) => absolute(&cwd, o),
            None => absolute(base, &raw.output_dir),
        };
        let catalog_path = raw.catalog.as_deref().map_or_else(|| output_dir.join("catalog.json"), |c| absolute(base, c));
        let mut measures = raw.measures;
        if !measure_seed_set {
            measures.seed = seed;
        }
        let real = raw.real.into_iter().map(|r| RealSource { path: absolute(base, &r.path), ..r }).collect();
        let serve = ServeConfig { ui_dir: raw.serve.ui_dir.as_deref().map(|d| absolute(base, d)), ..raw.serve };
        let cfg = RunConfig {
            seed,
            output_dir,
            catalog_path,
            labels: raw.labels.as_deref().map(|l| absolute(base, l)),
            replicates: raw.replicates,
            participants: raw.participants,
            coverage: raw.coverage,
            stimulus_canvas: raw.stimulus_canvas,
            align_canvas: raw.align_canvas,
            resamples: raw.resamples,
            measures,
            real,
            providers: raw.providers,
            serve,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if !(1..=99).contains(&self.participants) {
            return bad("participants must lie in 1..=99".into());
        }
        if self.stimulus_canvas < MIN_CANVAS || self.align_canvas < MIN_CANVAS {
            return bad(format!("canvases must be at least {MIN_CANVAS}px"));
        }
        if self.align_canvas > self.stimulus_canvas {
            return bad("align_canvas cannot exceed stimulus_canvas".into());
        }
        if self.resamples == 0 {
            return bad("resamples must be positive".into());
        }
        self.measures.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let mut names = HashSet::new();
        for p in &self.providers {
            if !names.insert(p.model_name.as_str()) {
                return bad(format!("provider model {} listed twice", p.model_name));
            }
        }
        let mut datasets = HashSet::new();
        for r in &self.real {
            if !datasets.insert((r.dataset_id.as_str(), r.window)) {
                return bad(format!("real dataset {} listed twice for one window", r.dataset_id));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_resolution() {
        let base = Path::new("/cfg");
        let cfg = RunConfig::from_toml("seed = 7\n", base, &Overrides::default()).unwrap();
        assert_eq!(cfg.output_dir, Path::new("/cfg/out"));
        assert_eq!(cfg.catalog_path, Path::new("/cfg/out/catalog.json"));
        assert_eq!((cfg.participants, cfg.replicates, cfg.align_canvas), (32, 8, 512));
        assert_eq!(cfg.measures.seed, 7);
        assert_eq!(cfg.serve.time_limit_s, 60);

        let text = "seed = 1\noutput_dir = \"run\"\n[measures]\nseed = 3\n[[real]]\ndataset_id = \"mail\"\npath = \"data/mail.txt\"\nwindow = \"weekly\"\n";
        let o = Overrides { seed: Some(9), output_dir: None };
        let cfg = RunConfig::from_toml(text, base, &o).unwrap();
        assert_eq!((cfg.seed, cfg.measures.seed), (9, 3));
        assert_eq!(cfg.real[0].path, Path::new("/cfg/data/mail.txt"));
        assert_eq!(cfg.real[0].window, Window::Weekly);
    }

    #[test]
    fn rejects_bad_configs() {
        let base = Path::new("/");
        let none = Overrides::default();
        for text in [
            "participants = 2\n",
            "seed = 1\nbogus = 2\n",
            "seed = 1\nalign_canvas = 2048\n",
            "seed = 1\n[measures]\nwl_iterations = 0\n",
            "seed = 1\n[[providers]]\nprovider = \"mock\"\nmodel_name = \"m\"\n[[providers]]\nprovider = \"mock\"\nmodel_name = \"m\"\n",
        ] {
            assert!(matches!(RunConfig::from_toml(text, base, &none), Err(CliError::Config(_))), "{text}");
        }
    }
}
