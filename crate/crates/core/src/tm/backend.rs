//! Generation backends: seeded simulation, cache replay, and an
//! OpenAI-compatible chat endpoint that records every exchange.

use super::cache::{cache_key, RecordCache};
use super::config::{BackendConfig, SimulatedConfig, SimulatedInput, SimulatedMode};
use super::{InputCase, SamplingParams, TmError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task<'a> {
    /// Produce a specification.
    Spec,
    /// Label one docstring sentence as pre-condition, post-condition or none.
    Classify { sentence: &'a str },
}

#[derive(Debug, Clone, Copy)]
pub struct GenerationRequest<'a> {
    pub input: &'a InputCase,
    pub prompt: &'a str,
    pub sampling: &'a SamplingParams,
    pub sample_index: usize,
    pub retry: u32,
    pub task: Task<'a>,
}

pub trait Backend: Send + Sync {
    fn backend_id(&self) -> &str;
    fn generate(&self, req: &GenerationRequest<'_>) -> Result<String, TmError>;
    /// Network requests issued so far.
    fn network_calls(&self) -> usize {
        0
    }
}

/// Builds the backend described by `cfg`.
pub fn build(cfg: &BackendConfig) -> Result<Box<dyn Backend>, TmError> {
    let id = cfg.backend_id();
    Ok(match cfg {
        BackendConfig::Simulated(s) => Box::new(Simulated::new(s.clone())),
        BackendConfig::Replay { cache, .. } => Box::new(Replay::open(cache, &id)?),
        BackendConfig::HttpChat {
            endpoint,
            model,
            cache,
            max_attempts,
            timeout_secs,
            ..
        } => Box::new(HttpChat::new(endpoint, model, cache, &id, *max_attempts, *timeout_secs)?),
    })
}

/// Applies temperature, top-k and top-p to raw candidate weights and
/// returns normalized probabilities in candidate order. Temperature 0 is
/// greedy (first maximal weight).
pub fn decode_weights(weights: &[f64], sampling: &SamplingParams) -> Result<Vec<f64>, TmError> {
    if weights.is_empty() || weights.iter().all(|w| *w <= 0.0) {
        return Err(TmError::Config("candidate weights sum to zero".into()));
    }
    let mut p: Vec<f64> = if sampling.temperature == 0.0 {
        let top = weights.iter().cloned().fold(f64::MIN, f64::max);
        let first = weights.iter().position(|w| *w == top).expect("nonempty");
        (0..weights.len()).map(|i| if i == first { 1.0 } else { 0.0 }).collect()
    } else {
        let logits: Vec<f64> = weights
            .iter()
            .map(|w| if *w > 0.0 { w.ln() / sampling.temperature } else { f64::NEG_INFINITY })
            .collect();
        let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        logits.iter().map(|l| (l - m).exp()).collect()
    };
    let normalize = |p: &mut Vec<f64>| {
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
    };
    normalize(&mut p);
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    let mut keep = vec![false; p.len()];
    let mut mass = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        if p[i] == 0.0 || (sampling.top_k > 0 && rank >= sampling.top_k as usize) {
            break;
        }
        keep[i] = true;
        mass += p[i];
        if mass >= sampling.top_p - 1e-12 {
            break;
        }
    }
    for (x, k) in p.iter_mut().zip(&keep) {
        if !k {
            *x = 0.0;
        }
    }
    normalize(&mut p);
    Ok(p)
}

/// Independent stream per (seed, input, sample, retry).
pub fn keyed_rng(seed: u64, input_id: &str, sample_index: usize, retry: u32) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((input_id.len() as u64).to_le_bytes());
    h.update(input_id.as_bytes());
    h.update((sample_index as u64).to_le_bytes());
    h.update(retry.to_le_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

pub struct Simulated {
    cfg: SimulatedConfig,
}

impl Simulated {
    pub fn new(cfg: SimulatedConfig) -> Self {
        Self { cfg }
    }

    fn distribution(&self, input_id: &str) -> Result<&SimulatedInput, TmError> {
        self.cfg
            .inputs
            .get(input_id)
            .or(self.cfg.fallback.as_ref())
            .ok_or_else(|| TmError::UnknownInput(input_id.to_string()))
    }
}

impl Backend for Simulated {
    fn backend_id(&self) -> &str {
        &self.cfg.backend_id
    }

    fn generate(&self, req: &GenerationRequest<'_>) -> Result<String, TmError> {
        if let Task::Classify { sentence } = req.task {
            return Ok(self
                .cfg
                .sentence_labels
                .get(sentence.trim())
                .cloned()
                .unwrap_or_else(|| "none".into()));
        }
        if self.cfg.echo_groundtruth {
            return req
                .input
                .groundtruth
                .as_ref()
                .map(|(_, text)| text.clone())
                .ok_or_else(|| TmError::Config(format!("input {} has no groundtruth to echo", req.input.id)));
        }
        let dist = self.distribution(&req.input.id)?;
        let attempt = &dist.attempts[(req.retry as usize).min(dist.attempts.len() - 1)];
        let weights: Vec<f64> = attempt.iter().map(|c| c.weight).collect();
        let pick = match dist.mode {
            SimulatedMode::Cycle => {
                let total: usize = weights.iter().map(|w| w.round() as usize).sum();
                if total == 0 {
                    return Err(TmError::Config("cycle weights sum to zero".into()));
                }
                let mut slot = req.sample_index % total;
                let mut pick = 0;
                for (i, w) in weights.iter().enumerate() {
                    let n = w.round() as usize;
                    if slot < n {
                        pick = i;
                        break;
                    }
                    slot -= n;
                }
                pick
            }
            SimulatedMode::Sample => {
                let probs = decode_weights(&weights, req.sampling)?;
                let u: f64 = keyed_rng(req.sampling.seed, &req.input.id, req.sample_index, req.retry).random();
                let mut acc = 0.0;
                let last = probs.iter().rposition(|p| *p > 0.0).expect("some mass");
                let mut pick = last;
                for (i, p) in probs.iter().enumerate() {
                    acc += p;
                    if *p > 0.0 && u < acc {
                        pick = i;
                        break;
                    }
                }
                pick
            }
        };
        Ok(attempt[pick].text.clone())
    }
}

/// Serves answers recorded by an earlier run; never touches the network.
pub struct Replay {
    backend_id: String,
    cache: RecordCache,
}

impl Replay {
    pub fn open(path: &Path, backend_id: &str) -> Result<Self, TmError> {
        if !path.exists() {
            return Err(TmError::Config(format!("replay cache {} does not exist", path.display())));
        }
        Ok(Self {
            backend_id: backend_id.to_string(),
            cache: RecordCache::open(path)?,
        })
    }
}

impl Backend for Replay {
    fn backend_id(&self) -> &str {
        &self.backend_id
    }

    fn generate(&self, req: &GenerationRequest<'_>) -> Result<String, TmError> {
        let key = cache_key(&self.backend_id, req.prompt, req.sampling, req.sample_index, req.retry);
        self.cache.get(&key).ok_or_else(|| TmError::ReplayMiss {
            key,
            input: req.input.id.clone(),
            sample_index: req.sample_index,
            retry: req.retry,
        })
    }
}

/// OpenAI-compatible chat-completions client. The bearer token comes from
/// `TMPROB_API_KEY` when set.
pub struct HttpChat {
    endpoint: String,
    model: String,
    backend_id: String,
    max_attempts: u32,
    agent: ureq::Agent,
    cache: RecordCache,
    calls: AtomicUsize,
}

pub const API_KEY_VAR: &str = "TMPROB_API_KEY";

impl HttpChat {
    pub fn new(
        endpoint: &str,
        model: &str,
        cache: &Path,
        backend_id: &str,
        max_attempts: u32,
        timeout_secs: u64,
    ) -> Result<Self, TmError> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(timeout_secs.max(1))))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self {
            endpoint: endpoint.to_string(),
            model: model.to_string(),
            backend_id: backend_id.to_string(),
            max_attempts: max_attempts.max(1),
            agent,
            cache: RecordCache::open(cache)?,
            calls: AtomicUsize::new(0),
        })
    }

    fn call(&self, body: &serde_json::Value) -> Result<Result<String, String>, String> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let mut req = self.agent.post(&self.endpoint);
        if let Ok(token) = std::env::var(API_KEY_VAR) {
            req = req.header("Authorization", &format!("Bearer {token}"));
        }
        let mut resp = req.send_json(body).map_err(|e| format!("transport: {e}"))?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(|e| format!("reading body: {e}"))?;
        if status == 429 || status >= 500 {
            return Err(format!("status {status}: {}", text.trim()));
        }
        if status >= 400 {
            return Ok(Err(format!("status {status}: {}", text.trim())));
        }
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| format!("malformed response: {e}"))?;
        Ok(v["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| "response lacks choices[0].message.content".to_string()))
    }
}

impl Backend for HttpChat {
    fn backend_id(&self) -> &str {
        &self.backend_id
    }

    fn network_calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    fn generate(&self, req: &GenerationRequest<'_>) -> Result<String, TmError> {
        let body = serde_json::json!({
            "model": self.model,
            "messages": [{"role": "user", "content": req.prompt}],
            "temperature": req.sampling.temperature,
            "top_p": req.sampling.top_p,
        });
        let mut last = String::new();
        for attempt in 0..self.max_attempts {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(50 << attempt.min(6)));
            }
            match self.call(&body) {
                Ok(Ok(text)) => {
                    let key = cache_key(&self.backend_id, req.prompt, req.sampling, req.sample_index, req.retry);
                    self.cache.append(&key, req.prompt, &text)?;
                    return Ok(text);
                }
                Ok(Err(fatal)) => return Err(TmError::Http(fatal)),
                Err(retryable) => last = retryable,
            }
        }
        Err(TmError::Http(format!("giving up after {} attempts: {last}", self.max_attempts)))
    }
}
