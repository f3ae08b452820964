use super::{prompt, SamplingParams, TmError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const DEFAULT_PROMPT: &str = "You write Dafny-style specifications for methods.\n\
Answer with requires/ensures clauses only.\n\n\
{examples}\n\
Docstring: {docstring}\n\
Signature: {signature}\n\
Specification:\n";

pub const DEFAULT_CORRECTIVE: &str = "You write Dafny-style specifications for methods.\n\
Answer with requires/ensures clauses only.\n\n\
Docstring: {docstring}\n\
Signature: {signature}\n\
Your previous answer was rejected by the compiler:\n\
{feedback}\n\
Corrected specification:\n";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preprocessing {
    #[default]
    None,
    /// Sentence-level classification into pre/post/context blocks.
    StructuredDocstring,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub text: String,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulatedMode {
    /// Draw from the decoded categorical distribution.
    #[default]
    Sample,
    /// Weights are integer multiplicities; sample `i` takes slot
    /// `i mod total` of the expanded list. Decoding parameters are ignored.
    Cycle,
}

/// Output distributions for one input. `attempts[k]` is used for the
/// k-th corrective retry; the last entry covers any later retry.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SimulatedInput {
    #[serde(default)]
    pub mode: SimulatedMode,
    pub attempts: Vec<Vec<Candidate>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SimulatedConfig {
    #[serde(default = "default_simulated_id")]
    pub backend_id: String,
    #[serde(default)]
    pub inputs: BTreeMap<String, SimulatedInput>,
    /// Used for inputs missing from `inputs`.
    #[serde(default)]
    pub fallback: Option<SimulatedInput>,
    /// Answer every spec request with the input's reference spec.
    #[serde(default)]
    pub echo_groundtruth: bool,
    /// Sentence classification answers, keyed by sentence text.
    #[serde(default)]
    pub sentence_labels: BTreeMap<String, String>,
}

fn default_simulated_id() -> String {
    "simulated".into()
}

fn default_attempts() -> u32 {
    3
}

fn default_timeout() -> u64 {
    60
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendConfig {
    Simulated(SimulatedConfig),
    Replay {
        cache: PathBuf,
        backend_id: String,
    },
    HttpChat {
        endpoint: String,
        model: String,
        cache: PathBuf,
        #[serde(default)]
        backend_id: Option<String>,
        #[serde(default = "default_attempts")]
        max_attempts: u32,
        #[serde(default = "default_timeout")]
        timeout_secs: u64,
    },
}

impl BackendConfig {
    pub fn backend_id(&self) -> String {
        match self {
            BackendConfig::Simulated(s) => s.backend_id.clone(),
            BackendConfig::Replay { backend_id, .. } => backend_id.clone(),
            BackendConfig::HttpChat { backend_id, model, .. } => {
                backend_id.clone().unwrap_or_else(|| format!("http-chat:{model}"))
            }
        }
    }
}

fn default_prompt() -> String {
    DEFAULT_PROMPT.into()
}

fn default_corrective() -> String {
    DEFAULT_CORRECTIVE.into()
}

fn default_retries() -> u32 {
    2
}

fn default_k() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TMConfig {
    pub tm_id: String,
    pub backend: BackendConfig,
    #[serde(default = "default_prompt")]
    pub prompt_template: String,
    #[serde(default = "default_corrective")]
    pub corrective_template: String,
    #[serde(default = "default_retries")]
    pub max_corrective_retries: u32,
    #[serde(default = "default_k")]
    pub fewshot_k: usize,
    #[serde(default)]
    pub fewshot_store: Option<PathBuf>,
    #[serde(default)]
    pub sampling: SamplingParams,
    #[serde(default)]
    pub preprocessing: Preprocessing,
}

impl TMConfig {
    pub fn new(tm_id: &str, backend: BackendConfig) -> Self {
        Self {
            tm_id: tm_id.into(),
            backend,
            prompt_template: default_prompt(),
            corrective_template: default_corrective(),
            max_corrective_retries: default_retries(),
            fewshot_k: default_k(),
            fewshot_store: None,
            sampling: SamplingParams::default(),
            preprocessing: Preprocessing::None,
        }
    }

    /// Reads a JSON config. Relative paths inside it are resolved against
    /// the config file's directory.
    pub fn load(path: &Path) -> Result<Self, TmError> {
        let text = std::fs::read_to_string(path).map_err(|e| TmError::io(path, e))?;
        let mut cfg: TMConfig =
            serde_json::from_str(&text).map_err(|e| TmError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.fewshot_store.as_mut() {
            fix(p);
        }
        match &mut self.backend {
            BackendConfig::Replay { cache, .. } | BackendConfig::HttpChat { cache, .. } => fix(cache),
            BackendConfig::Simulated(_) => {}
        }
    }

    pub fn validate(&self) -> Result<(), TmError> {
        self.sampling.validate()?;
        prompt::check_template(&self.prompt_template, false)
            .map_err(|e| TmError::Template(format!("prompt_template: {e}")))?;
        prompt::check_template(&self.corrective_template, true)
            .map_err(|e| TmError::Template(format!("corrective_template: {e}")))?;
        if let BackendConfig::Simulated(s) = &self.backend {
            for (id, input) in s.inputs.iter().map(|(k, v)| (k.as_str(), v)).chain(s.fallback.iter().map(|f| ("fallback", f))) {
                if input.attempts.is_empty() || input.attempts.iter().any(|a| a.is_empty()) {
                    return Err(TmError::Config(format!("simulated input {id}: every attempt needs a candidate")));
                }
                if input.attempts.iter().flatten().any(|c| !(c.weight >= 0.0 && c.weight.is_finite())) {
                    return Err(TmError::Config(format!("simulated input {id}: weights must be finite and >= 0")));
                }
            }
        }
        Ok(())
    }
}
