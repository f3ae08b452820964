use crate::spec_lang::{parse_signature, parse_spec};
use crate::tm::InputCase;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GroundtruthRecord {
    #[serde(default)]
    pub requires: Vec<String>,
    #[serde(default)]
    pub ensures: Vec<String>,
}

impl GroundtruthRecord {
    pub fn to_spec_text(&self) -> String {
        self.requires
            .iter()
            .map(|r| format!("requires {};", r.trim().trim_end_matches(';')))
            .chain(self.ensures.iter().map(|e| format!("ensures {};", e.trim().trim_end_matches(';'))))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// On-disk shape of one case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub id: String,
    pub docstring: String,
    pub signature: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groundtruth: Option<GroundtruthRecord>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    /// File stem plus a content-hash prefix.
    pub id: String,
    pub cases: Vec<InputCase>,
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: not a dataset: {message}")]
    Format { path: PathBuf, message: String },
    #[error("case {id}: {field}: {message}")]
    Case { id: String, field: &'static str, message: String },
    #[error("case id {0} occurs more than once")]
    DuplicateId(String),
}

pub fn dataset_id(path: &Path, bytes: &[u8]) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let digest = hex::encode(Sha256::digest(bytes));
    format!("{stem}@{}", &digest[..12])
}

/// Validates case records: unique ids, parseable signatures, groundtruth
/// that parses and typechecks.
pub fn cases_from_records(records: Vec<CaseRecord>) -> Result<Vec<InputCase>, DatasetError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        if !seen.insert(r.id.clone()) {
            return Err(DatasetError::DuplicateId(r.id));
        }
        let case_err = |field, message: String| DatasetError::Case {
            id: r.id.clone(),
            field,
            message,
        };
        let signature = parse_signature(&r.signature).map_err(|e| case_err("signature", e.to_string()))?;
        let groundtruth = match &r.groundtruth {
            None => None,
            Some(g) => {
                let text = g.to_spec_text();
                let spec = parse_spec(&text, &signature).map_err(|e| case_err("groundtruth", format!("{e} in `{text}`")))?;
                Some((spec, text))
            }
        };
        out.push(InputCase {
            id: r.id,
            docstring: r.docstring,
            signature,
            signature_text: r.signature,
            groundtruth,
        });
    }
    Ok(out)
}

pub fn load_dataset(path: &Path) -> Result<Dataset, DatasetError> {
    let bytes = std::fs::read(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let records: Vec<CaseRecord> = serde_json::from_slice(&bytes).map_err(|e| DatasetError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(Dataset {
        id: dataset_id(path, &bytes),
        cases: cases_from_records(records)?,
    })
}
