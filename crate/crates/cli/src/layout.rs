//! Where each stage reads and writes under the output directory.

use std::path::{Path, PathBuf};

use graphsim_core::catalog::Catalog;
use graphsim_harness::Session;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputLayout {
    pub root: PathBuf,
}

/// File-name-safe form of an identifier.
pub fn slug(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' }).collect()
}

impl OutputLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        OutputLayout { root: root.into() }
    }

    pub fn graph(&self, id: &str) -> PathBuf {
        self.root.join("graphs").join(format!("{}.txt", slug(id)))
    }

    pub fn stimulus_png(&self, id: &str) -> PathBuf {
        self.root.join("stimuli").join(format!("{}.png", slug(id)))
    }

    pub fn stimulus_sidecar(&self, id: &str) -> PathBuf {
        self.root.join("stimuli").join(format!("{}.json", slug(id)))
    }

    pub fn sessions_dir(&self) -> PathBuf {
        self.root.join("sessions")
    }

    pub fn session(&self, id: &str) -> PathBuf {
        self.sessions_dir().join(format!("{}.json", slug(id)))
    }

    pub fn aligned(&self, triplet_id: &str, target_id: &str) -> PathBuf {
        self.root.join("aligned").join(slug(triplet_id)).join(format!("{}.png", slug(target_id)))
    }

    pub fn model_dir(&self) -> PathBuf {
        self.root.join("model")
    }

    pub fn model_image(&self, triplet_id: &str, stimulus_id: &str) -> PathBuf {
        self.model_dir().join(slug(triplet_id)).join(format!("{}.png", slug(stimulus_id)))
    }

    pub fn scores(&self) -> PathBuf {
        self.root.join("scores.tsv")
    }

    pub fn judgments_dir(&self) -> PathBuf {
        self.root.join("judgments")
    }

    pub fn human(&self) -> PathBuf {
        self.judgments_dir().join("human.jsonl")
    }

    pub fn model_judgments(&self, model_name: &str) -> PathBuf {
        self.judgments_dir().join(format!("model-{}.jsonl", slug(model_name)))
    }

    pub fn report_dir(&self) -> PathBuf {
        self.root.join("report")
    }

    /// Sessions sorted by id.
    pub fn load_sessions(&self) -> Result<Vec<Session>, CliError> {
        let dir = self.sessions_dir();
        let entries = match std::fs::read_dir(&dir) {
            Ok(e) => e,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(CliError::MissingInput { path: dir, stage: "triplets" }),
            Err(e) => return Err(CliError::io(&dir, e)),
        };
        let mut paths = Vec::new();
        for e in entries {
            let path = e.map_err(|e| CliError::io(&dir, e))?.path();
            if path.extension().is_some_and(|x| x == "json") {
                paths.push(path);
            }
        }
        if paths.is_empty() {
            return Err(CliError::MissingInput { path: dir, stage: "triplets" });
        }
        paths.sort();
        paths.iter().map(|p| Session::load(p).map_err(CliError::from)).collect()
    }
}

pub fn load_catalog(path: &Path) -> Result<Catalog, CliError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(CliError::MissingInput { path: path.to_path_buf(), stage: "generate" })
        }
        Err(e) => return Err(CliError::io(path, e)),
    };
    Catalog::from_json(&text).map_err(|e| CliError::parse(path, e))
}

/// Writes through a sibling temporary file so an interrupted run never leaves a
/// truncated output that a later run would mistake for a finished one.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = temp_sibling(path);
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

/// `dir/.name.tmp.ext`, keeping the extension so encoders can infer the format.
pub fn temp_sibling(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!(".{stem}.tmp.{ext}"))
}
