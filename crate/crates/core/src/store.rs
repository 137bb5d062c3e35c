//! Append-only JSON Lines store of judgment records.

use std::fs::{File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::record::JudgmentRecord;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Line { line: usize, source: serde_json::Error },
    #[error("record rejected: {0}")]
    Invalid(String),
    #[error("unterminated final line: {0:?}")]
    PartialTail(String),
}

/// One record per line; every append is flushed before returning.
#[derive(Debug)]
pub struct JsonlStore {
    path: PathBuf,
    file: File,
    recovered_tail: Option<String>,
}

/// Records read from a store, plus an unterminated final line left by an interrupted
/// write, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub records: Vec<JudgmentRecord>,
    pub partial_tail: Option<String>,
}

impl JsonlStore {
    /// Opens for appending. An unterminated final line is cut off first so the next
    /// record starts on a fresh line; the removed text is kept in `recovered_tail`.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut recovered_tail = None;
        if path.exists() {
            let bytes = std::fs::read(&path)?;
            let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
            if keep < bytes.len() {
                recovered_tail = Some(String::from_utf8_lossy(&bytes[keep..]).into_owned());
                OpenOptions::new().write(true).open(&path)?.set_len(keep as u64)?;
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(JsonlStore { path, file, recovered_tail })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn recovered_tail(&self) -> Option<&str> {
        self.recovered_tail.as_deref()
    }

    /// Validates and appends a record.
    pub fn append(&mut self, record: &JudgmentRecord) -> Result<(), StoreError> {
        if let Err(errors) = record.validate() {
            let text = errors.iter().map(|e| format!("{}: {}", e.field, e.message)).collect::<Vec<_>>().join("; ");
            return Err(StoreError::Invalid(text));
        }
        let mut line = serde_json::to_string(record).expect("record serializes");
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.flush()?;
        Ok(())
    }

    pub fn read_all(&self) -> Result<Vec<JudgmentRecord>, StoreError> {
        read_jsonl(&self.path)
    }
}

/// Reads every record; blank lines are skipped and any malformed line is an error.
pub fn read_jsonl(path: &Path) -> Result<Vec<JudgmentRecord>, StoreError> {
    let loaded = load_records(path)?;
    match loaded.partial_tail {
        Some(tail) => Err(StoreError::PartialTail(tail)),
        None => Ok(loaded.records),
    }
}

/// Reads every complete record. An unparseable final line without a terminating newline
/// is returned as `partial_tail` instead of failing; any other bad line is an error.
pub fn load_records(path: &Path) -> Result<Loaded, StoreError> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    let terminated = text.is_empty() || text.ends_with('\n');
    let lines: Vec<&str> = text.split_terminator('\n').collect();
    let mut records = Vec::with_capacity(lines.len());
    let mut partial_tail = None;
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(r) => records.push(r),
            Err(_) if i + 1 == lines.len() && !terminated => partial_tail = Some(line.to_string()),
            Err(source) => return Err(StoreError::Line { line: i + 1, source }),
        }
    }
    Ok(Loaded { records, partial_tail })
}
