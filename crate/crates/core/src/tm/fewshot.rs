//! Few-shot example store with bag-of-words cosine retrieval.

use super::TmError;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FewShotEntry {
    pub docstring: String,
    pub signature: String,
    pub spec: String,
}

#[derive(Debug, Clone, Default)]
pub struct FewShotStore {
    entries: Vec<FewShotEntry>,
    index: Vec<(HashMap<String, f64>, f64)>,
}

/// Lowercased alphanumeric runs.
pub fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
}

fn vectorize(text: &str) -> (HashMap<String, f64>, f64) {
    let mut v: HashMap<String, f64> = HashMap::new();
    for t in tokens(text) {
        *v.entry(t).or_default() += 1.0;
    }
    let norm = v.values().map(|x| x * x).sum::<f64>().sqrt();
    (v, norm)
}

impl FewShotStore {
    pub fn new(entries: Vec<FewShotEntry>) -> Self {
        let index = entries.iter().map(|e| vectorize(&e.docstring)).collect();
        Self { entries, index }
    }

    pub fn load(path: &Path) -> Result<Self, TmError> {
        let text = std::fs::read_to_string(path).map_err(|e| TmError::io(path, e))?;
        let entries: Vec<FewShotEntry> =
            serde_json::from_str(&text).map_err(|e| TmError::Config(format!("{}: {e}", path.display())))?;
        Ok(Self::new(entries))
    }

    pub fn entries(&self) -> &[FewShotEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Cosine similarity of each entry's docstring to `query`.
    pub fn similarities(&self, query: &str) -> Vec<f64> {
        let (q, qn) = vectorize(query);
        self.index
            .iter()
            .map(|(v, n)| {
                if qn == 0.0 || *n == 0.0 {
                    return 0.0;
                }
                let dot: f64 = q.iter().filter_map(|(t, x)| v.get(t).map(|y| x * y)).sum();
                dot / (qn * n)
            })
            .collect()
    }

    /// The `k` most similar entries, best first; ties keep store order.
    pub fn retrieve(&self, docstring: &str, k: usize) -> Vec<FewShotEntry> {
        if k == 0 {
            return Vec::new();
        }
        let sims = self.similarities(docstring);
        let mut order: Vec<usize> = (0..self.entries.len()).collect();
        order.sort_by(|&a, &b| sims[b].total_cmp(&sims[a]).then(a.cmp(&b)));
        order.into_iter().take(k).map(|i| self.entries[i].clone()).collect()
    }
}
