//! Transference-model runtime: a docstring is turned into a prompt (with
//! retrieved few-shot examples), sent to a generation backend, and the
//! answer is syntax-checked, with corrective re-prompts on parse errors.

pub mod backend;
pub mod cache;
pub mod config;
pub mod fewshot;
pub mod pipeline;
pub mod prompt;

pub use backend::{decode_weights, Backend, GenerationRequest, Task};
pub use cache::{cache_key, CacheRecord, RecordCache};
pub use config::{BackendConfig, Candidate, Preprocessing, SimulatedConfig, SimulatedInput, SimulatedMode, TMConfig};
pub use fewshot::{FewShotEntry, FewShotStore};
pub use pipeline::{extract_spec_text, split_sentences, SentenceLabel, Tm};
pub use prompt::render_prompt;

use crate::spec_lang::{Signature, SpecPair};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// Decoding parameters plus the number of re-executions per input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingParams {
    pub temperature: f64,
    pub top_k: u32,
    pub top_p: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self {
            temperature: 0.7,
            top_k: 40,
            top_p: 0.95,
            n_samples: 30,
            seed: 0,
        }
    }
}

impl SamplingParams {
    pub fn validate(&self) -> Result<(), TmError> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(TmError::Config(format!("temperature must be >= 0, got {}", self.temperature)));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(TmError::Config(format!("top_p must be in (0, 1], got {}", self.top_p)));
        }
        if self.n_samples == 0 {
            return Err(TmError::Config("n_samples must be at least 1".into()));
        }
        Ok(())
    }
}

/// One autoformalization problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputCase {
    pub id: String,
    pub docstring: String,
    pub signature: Signature,
    pub signature_text: String,
    /// Reference spec and its surface text.
    pub groundtruth: Option<(SpecPair, String)>,
}

#[derive(Debug, thiserror::Error)]
pub enum TmError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("template: {0}")]
    Template(String),
    #[error("replay cache has no entry for input {input}, sample {sample_index}, retry {retry} (key {key})")]
    ReplayMiss {
        key: String,
        input: String,
        sample_index: usize,
        retry: u32,
    },
    #[error("http backend: {0}")]
    Http(String),
    #[error("simulated backend has no distribution for input {0}")]
    UnknownInput(String),
}

impl TmError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        TmError::Io {
            path: path.into(),
            source,
        }
    }
}
