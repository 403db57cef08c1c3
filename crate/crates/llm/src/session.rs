//! Append-only JSON-lines session store with a checksum on every line.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("session store {0} does not exist")]
    Missing(PathBuf),
    #[error("session store line {line}: {reason}")]
    Corrupt { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub key: String,
    pub response: String,
}

#[derive(Serialize, Deserialize)]
struct Line {
    key: String,
    response: String,
    checksum: String,
}

pub fn record_checksum(key: &str, response: &str) -> String {
    let mut h = Sha256::new();
    h.update(key.as_bytes());
    h.update([0u8]);
    h.update(response.as_bytes());
    hex::encode(h.finalize())
}

/// Concurrent lookups share a read lock; appends are serialized.
#[derive(Debug)]
pub struct SessionStore {
    path: PathBuf,
    index: RwLock<HashMap<String, String>>,
    file: Mutex<File>,
}

impl SessionStore {
    /// Opens the store, creating an empty file when absent.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let index = if path.exists() { load(&path)? } else { HashMap::new() };
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self { path, index: RwLock::new(index), file: Mutex::new(file) })
    }

    /// Opens a store that must already exist.
    pub fn open_existing(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        if !path.as_ref().exists() {
            return Err(StoreError::Missing(path.as_ref().to_path_buf()));
        }
        Self::open(path)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn get(&self, key: &str) -> Option<String> {
        self.index.read().unwrap().get(key).cloned()
    }

    pub fn len(&self) -> usize {
        self.index.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Appends a record. A later record for the same key shadows earlier ones.
    pub fn append(&self, record: &SessionRecord) -> Result<(), StoreError> {
        let line = Line {
            key: record.key.clone(),
            response: record.response.clone(),
            checksum: record_checksum(&record.key, &record.response),
        };
        let mut text = serde_json::to_string(&line).expect("record serializes");
        text.push('\n');
        let mut file = self.file.lock().unwrap();
        file.write_all(text.as_bytes())?;
        file.flush()?;
        self.index.write().unwrap().insert(record.key.clone(), record.response.clone());
        Ok(())
    }
}

fn load(path: &Path) -> Result<HashMap<String, String>, StoreError> {
    let mut out = HashMap::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Line =
            serde_json::from_str(&line).map_err(|e| StoreError::Corrupt { line: i + 1, reason: e.to_string() })?;
        if record_checksum(&rec.key, &rec.response) != rec.checksum {
            return Err(StoreError::Corrupt { line: i + 1, reason: "checksum mismatch".into() });
        }
        out.insert(rec.key, rec.response);
    }
    Ok(out)
}
