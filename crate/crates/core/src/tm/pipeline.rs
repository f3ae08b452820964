//! The per-sample pipeline: optional docstring preprocessing, few-shot
//! retrieval, prompting, generation and the corrective retry loop.

use super::backend::{self, Backend, GenerationRequest, Task};
use super::config::{Preprocessing, TMConfig};
use super::fewshot::FewShotStore;
use super::prompt::render_prompt;
use super::{InputCase, TmError};
use crate::distribution::{OutputSample, ParseStatus};
use crate::spec_lang::parse_spec;
use rayon::prelude::*;

pub const CLASSIFY_PROMPT: &str = "Classify the following sentence taken from a method docstring.\n\
Answer with exactly one of: pre-condition, post-condition, none.\n\
Sentence: ";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SentenceLabel {
    Pre,
    Post,
    None,
}

impl SentenceLabel {
    pub fn from_answer(answer: &str) -> Self {
        let a = answer.trim().to_lowercase();
        if a.starts_with("pre") {
            SentenceLabel::Pre
        } else if a.starts_with("post") {
            SentenceLabel::Post
        } else {
            SentenceLabel::None
        }
    }
}

/// Splits after `.`, `!` or `?` when followed by whitespace. Sentences
/// keep their terminator and are trimmed; empty pieces are dropped.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut it = text.char_indices().peekable();
    while let Some((i, c)) = it.next() {
        if matches!(c, '.' | '!' | '?') {
            if let Some(&(_, next)) = it.peek() {
                if next.is_whitespace() {
                    let end = i + c.len_utf8();
                    out.push(text[start..end].to_string());
                    start = end;
                }
            }
        }
    }
    out.push(text[start..].to_string());
    out.into_iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Pulls the body of the first fenced code block when there is one,
/// otherwise returns the text unchanged.
pub fn extract_spec_text(raw: &str) -> &str {
    let Some(open) = raw.find("```") else {
        return raw;
    };
    let after = &raw[open + 3..];
    let body = match after.find('\n') {
        Some(nl) => &after[nl + 1..],
        None => return raw,
    };
    match body.find("```") {
        Some(close) => &body[..close],
        None => body,
    }
}

/// A configured model ready to sample.
pub struct Tm {
    pub config: TMConfig,
    backend: Box<dyn Backend>,
    store: FewShotStore,
}

impl Tm {
    pub fn new(config: TMConfig) -> Result<Self, TmError> {
        config.validate()?;
        let backend = backend::build(&config.backend)?;
        let store = match &config.fewshot_store {
            Some(p) => FewShotStore::load(p)?,
            None => FewShotStore::default(),
        };
        Ok(Self { config, backend, store })
    }

    pub fn with_backend(config: TMConfig, backend: Box<dyn Backend>, store: FewShotStore) -> Result<Self, TmError> {
        config.validate()?;
        Ok(Self { config, backend, store })
    }

    pub fn backend(&self) -> &dyn Backend {
        self.backend.as_ref()
    }

    /// Docstring restructured into "Preconditions:", "Postconditions:" and
    /// (when non-empty) "Context:" blocks, one classification call per
    /// sentence.
    pub fn preprocess_docstring(&self, input: &InputCase, sample_index: usize) -> Result<String, TmError> {
        let (mut pre, mut post, mut ctx) = (Vec::new(), Vec::new(), Vec::new());
        for sentence in split_sentences(&input.docstring) {
            let prompt = format!("{CLASSIFY_PROMPT}{sentence}\nAnswer:");
            let answer = self.backend.generate(&GenerationRequest {
                input,
                prompt: &prompt,
                sampling: &self.config.sampling,
                sample_index,
                retry: 0,
                task: Task::Classify { sentence: &sentence },
            })?;
            match SentenceLabel::from_answer(&answer) {
                SentenceLabel::Pre => pre.push(sentence),
                SentenceLabel::Post => post.push(sentence),
                SentenceLabel::None => ctx.push(sentence),
            }
        }
        let mut out = format!("Preconditions:\n{}\nPostconditions:\n{}", pre.join("\n"), post.join("\n"));
        if !ctx.is_empty() {
            out.push_str("\nContext:\n");
            out.push_str(&ctx.join("\n"));
        }
        Ok(out)
    }

    pub fn run_pipeline(&self, input: &InputCase, sample_index: usize) -> Result<OutputSample, TmError> {
        let cfg = &self.config;
        let docstring = match cfg.preprocessing {
            Preprocessing::None => None,
            Preprocessing::StructuredDocstring => Some(self.preprocess_docstring(input, sample_index)?),
        };
        let examples = self.store.retrieve(&input.docstring, cfg.fewshot_k);
        let mut prompt = render_prompt(&cfg.prompt_template, input, docstring.as_deref(), &examples, None)?;
        let mut retry = 0;
        loop {
            let raw = self.backend.generate(&GenerationRequest {
                input,
                prompt: &prompt,
                sampling: &cfg.sampling,
                sample_index,
                retry,
                task: Task::Spec,
            })?;
            let parse_status = match parse_spec(extract_spec_text(&raw), &input.signature) {
                Ok(spec) => ParseStatus::Valid(spec),
                Err(e) => ParseStatus::Invalid(e.to_string()),
            };
            let feedback = match &parse_status {
                ParseStatus::Invalid(msg) if retry < cfg.max_corrective_retries => msg.clone(),
                _ => {
                    return Ok(OutputSample {
                        sample_index,
                        raw_text: raw,
                        parse_status,
                        retries_used: retry,
                        backend_id: self.backend.backend_id().to_string(),
                    })
                }
            };
            retry += 1;
            prompt = render_prompt(&cfg.corrective_template, input, docstring.as_deref(), &examples, Some(&feedback))?;
        }
    }

    /// `n_samples` independent pipeline runs, in sample order. Runs in
    /// parallel on the current rayon pool.
    pub fn sample_tm(&self, input: &InputCase) -> Result<Vec<OutputSample>, TmError> {
        (0..self.config.sampling.n_samples)
            .into_par_iter()
            .map(|i| self.run_pipeline(input, i))
            .collect()
    }
}
