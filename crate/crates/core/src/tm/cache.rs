//! Append-only JSON-lines record of backend exchanges, used for replay.

use super::{SamplingParams, TmError};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub key: String,
    pub prompt: String,
    pub response: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

/// Content key of one generation request.
pub fn cache_key(backend_id: &str, prompt: &str, sampling: &SamplingParams, sample_index: usize, retry: u32) -> String {
    let material = serde_json::json!([backend_id, prompt, sampling, sample_index, retry]);
    hex::encode(Sha256::digest(material.to_string().as_bytes()))
}

pub struct RecordCache {
    path: PathBuf,
    entries: Mutex<HashMap<String, String>>,
    writer: Mutex<Option<File>>,
}

impl RecordCache {
    /// Loads existing records; later lines win over earlier ones.
    /// A missing file is an empty cache.
    pub fn open(path: &Path) -> Result<Self, TmError> {
        let mut entries = HashMap::new();
        match File::open(path) {
            Ok(f) => {
                for (n, line) in BufReader::new(f).lines().enumerate() {
                    let line = line.map_err(|e| TmError::io(path, e))?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    let rec: CacheRecord = serde_json::from_str(&line)
                        .map_err(|e| TmError::Config(format!("{}:{}: bad cache record: {e}", path.display(), n + 1)))?;
                    entries.insert(rec.key, rec.response);
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(TmError::io(path, e)),
        }
        Ok(Self {
            path: path.to_path_buf(),
            entries: Mutex::new(entries),
            writer: Mutex::new(None),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn get(&self, key: &str) -> Option<String> {
        self.entries.lock().expect("cache lock").get(key).cloned()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Appends one record. Writers are serialized; each record is a single
    /// flushed line.
    pub fn append(&self, key: &str, prompt: &str, response: &str) -> Result<(), TmError> {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let rec = CacheRecord {
            key: key.to_string(),
            prompt: prompt.to_string(),
            response: response.to_string(),
            timestamp,
        };
        let mut line = serde_json::to_string(&rec).expect("record serializes");
        line.push('\n');
        let mut w = self.writer.lock().expect("cache writer lock");
        if w.is_none() {
            if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| TmError::io(dir, e))?;
            }
            let f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&self.path)
                .map_err(|e| TmError::io(&self.path, e))?;
            *w = Some(f);
        }
        let f = w.as_mut().expect("writer opened above");
        f.write_all(line.as_bytes())
            .and_then(|_| f.flush())
            .map_err(|e| TmError::io(&self.path, e))?;
        self.entries.lock().expect("cache lock").insert(rec.key, rec.response);
        Ok(())
    }
}
