//! Equivalence relations on model outputs.
//!
//! Three kinds, from finest to coarsest: byte equality, equality after
//! token-level normalization, and bounded semantic equivalence of parsed
//! specs. Each is an equivalence relation; a finer oracle answering `true`
//! implies every coarser one does too.

use crate::distribution::{OutputSample, ParseStatus};
use crate::spec_lang::lexer::tokenize;
use crate::spec_lang::{fingerprint, EvaluationBounds, Signature, SpecFingerprint};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleKind {
    ExactText,
    NormalizedText,
    BoundedSpecEquivalence { bounds: EvaluationBounds },
}

impl Default for OracleKind {
    fn default() -> Self {
        OracleKind::BoundedSpecEquivalence {
            bounds: EvaluationBounds::default(),
        }
    }
}

impl OracleKind {
    pub fn is_bounded(&self) -> bool {
        matches!(self, OracleKind::BoundedSpecEquivalence { .. })
    }

    pub fn bounds(&self) -> Option<EvaluationBounds> {
        match self {
            OracleKind::BoundedSpecEquivalence { bounds } => Some(*bounds),
            _ => None,
        }
    }
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleKind::ExactText => f.write_str("exact-text"),
            OracleKind::NormalizedText => f.write_str("normalized-text"),
            OracleKind::BoundedSpecEquivalence { bounds } => write!(f, "spec-equivalence ({bounds})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("sample {0} is syntactically invalid; semantic comparison needs parsed specs")]
    InvalidOperand(usize),
    #[error("bounded check failed: {0}")]
    Bounded(String),
}

/// Decides whether two outputs share a meaning class.
pub trait EquivalenceOracle: Send + Sync {
    fn equivalent(&self, a: &OutputSample, b: &OutputSample) -> Result<bool, OracleError>;
}

/// Canonical text used by [`OracleKind::NormalizedText`]: the token
/// lexemes joined by single spaces, with semicolons dropped. Text that does
/// not lex falls back to whitespace collapsing.
pub fn normalize_text(text: &str) -> String {
    match tokenize(text) {
        Ok(tokens) => tokens
            .iter()
            .filter(|t| !matches!(t.tok, crate::spec_lang::lexer::Tok::Semi | crate::spec_lang::lexer::Tok::Eof))
            .map(|t| &text[t.span.start..t.span.end])
            .collect::<Vec<_>>()
            .join(" "),
        Err(_) => text
            .split_whitespace()
            .map(|w| w.trim_matches(';'))
            .filter(|w| !w.is_empty())
            .collect::<Vec<_>>()
            .join(" "),
    }
}

/// The oracle realization of an [`OracleKind`] for one signature.
/// Fingerprints of parsed specs are memoized by their printed form.
pub struct SpecOracle {
    kind: OracleKind,
    sig: Signature,
    memo: Mutex<HashMap<String, Arc<SpecFingerprint>>>,
}

impl SpecOracle {
    pub fn new(kind: OracleKind, sig: Signature) -> Self {
        Self {
            kind,
            sig,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn kind(&self) -> OracleKind {
        self.kind
    }

    fn fingerprint_of(&self, s: &OutputSample, bounds: &EvaluationBounds) -> Result<Arc<SpecFingerprint>, OracleError> {
        let spec = match &s.parse_status {
            ParseStatus::Valid(spec) => spec,
            ParseStatus::Invalid(_) => return Err(OracleError::InvalidOperand(s.sample_index)),
        };
        let key = spec.to_string();
        if let Some(fp) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(fp.clone());
        }
        let fp = Arc::new(fingerprint(spec, &self.sig, bounds).map_err(|e| OracleError::Bounded(e.to_string()))?);
        self.memo.lock().expect("memo lock").insert(key, fp.clone());
        Ok(fp)
    }
}

impl EquivalenceOracle for SpecOracle {
    fn equivalent(&self, a: &OutputSample, b: &OutputSample) -> Result<bool, OracleError> {
        match &self.kind {
            OracleKind::ExactText => Ok(a.raw_text == b.raw_text),
            OracleKind::NormalizedText => Ok(normalize_text(&a.raw_text) == normalize_text(&b.raw_text)),
            OracleKind::BoundedSpecEquivalence { bounds } => {
                let fa = self.fingerprint_of(a, bounds)?;
                let fb = self.fingerprint_of(b, bounds)?;
                Ok(fa == fb)
            }
        }
    }
}
