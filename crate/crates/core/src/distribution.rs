//! Meaning classes and empirical distributions over them.
//!
//! Samples drawn from a model on one input are clustered into classes of
//! oracle-equivalent outputs; class sizes give the empirical distribution,
//! which is then judged for alignment with a reference and concentration.

use crate::oracle::{EquivalenceOracle, OracleError};
use crate::spec_lang::{parse_spec, Signature, SpecPair};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseStatus {
    Valid(SpecPair),
    /// Carries the parser's diagnostic, never empty.
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputSample {
    pub sample_index: usize,
    pub raw_text: String,
    pub parse_status: ParseStatus,
    pub retries_used: u32,
    pub backend_id: String,
}

impl OutputSample {
    /// Parses `raw_text` against `sig` to fill in the status.
    pub fn parsed(sample_index: usize, raw_text: &str, sig: &Signature, retries_used: u32, backend_id: &str) -> Self {
        let parse_status = match parse_spec(raw_text, sig) {
            Ok(spec) => ParseStatus::Valid(spec),
            Err(e) => ParseStatus::Invalid(e.to_string()),
        };
        Self {
            sample_index,
            raw_text: raw_text.to_string(),
            parse_status,
            retries_used,
            backend_id: backend_id.to_string(),
        }
    }

    /// Wraps a reference spec so it can be handed to an oracle.
    pub fn reference(text: &str, spec: SpecPair) -> Self {
        Self {
            sample_index: usize::MAX,
            raw_text: text.to_string(),
            parse_status: ParseStatus::Valid(spec),
            retries_used: 0,
            backend_id: "groundtruth".to_string(),
        }
    }

    pub fn is_valid(&self) -> bool {
        matches!(self.parse_status, ParseStatus::Valid(_))
    }

    pub fn spec(&self) -> Option<&SpecPair> {
        match &self.parse_status {
            ParseStatus::Valid(s) => Some(s),
            ParseStatus::Invalid(_) => None,
        }
    }

    pub fn parse_error(&self) -> Option<&str> {
        match &self.parse_status {
            ParseStatus::Invalid(e) => Some(e),
            ParseStatus::Valid(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeaningClass {
    pub class_id: usize,
    pub representative: OutputSample,
    pub member_indices: BTreeSet<usize>,
    pub is_valid: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalDistribution {
    pub input_id: String,
    pub classes: Vec<(MeaningClass, usize)>,
    pub total_samples: usize,
}

impl EmpiricalDistribution {
    pub fn counts(&self) -> Vec<usize> {
        self.classes.iter().map(|(_, n)| *n).collect()
    }

    pub fn max_count(&self) -> usize {
        self.classes.iter().map(|(_, n)| *n).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Alignment {
    Aligned,
    MisalignedCorrectGenerated,
    CorrectNotGenerated,
}

impl Alignment {
    pub const ALL: [Alignment; 3] = [
        Alignment::Aligned,
        Alignment::MisalignedCorrectGenerated,
        Alignment::CorrectNotGenerated,
    ];

    pub fn row_label(self) -> &'static str {
        match self {
            Alignment::Aligned => "Aligned",
            Alignment::MisalignedCorrectGenerated => "Correct class gen. but misaligned distr.",
            Alignment::CorrectNotGenerated => "Correct class not generated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Concentration {
    Concentrated,
    NotConcentrated,
}

impl Concentration {
    pub const ALL: [Concentration; 2] = [Concentration::Concentrated, Concentration::NotConcentrated];

    pub fn column_label(self) -> &'static str {
        match self {
            Concentration::Concentrated => "Concentrated",
            Concentration::NotConcentrated => "Not Concentrated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Verdict {
    pub alignment: Alignment,
    pub concentration: Concentration,
    pub winning_class_id: usize,
    pub winner_tied: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DistributionError {
    #[error("distribution has no samples")]
    Empty,
    #[error("sample index {0} occurs more than once")]
    DuplicateSampleIndex(usize),
    #[error("oracle failed comparing sample {first} with sample {second}: {source}")]
    Oracle {
        first: usize,
        second: usize,
        #[source]
        source: OracleError,
    },
}

/// Greedy partition of `samples` into meaning classes. Each valid sample
/// is compared with the representative (first member) of every existing
/// valid class and joins the first match; invalid samples become singleton
/// classes. Class ids follow order of first appearance.
pub fn cluster(samples: &[OutputSample], oracle: &dyn EquivalenceOracle) -> Result<Vec<MeaningClass>, DistributionError> {
    let mut seen = BTreeSet::new();
    for s in samples {
        if !seen.insert(s.sample_index) {
            return Err(DistributionError::DuplicateSampleIndex(s.sample_index));
        }
    }
    let mut classes: Vec<MeaningClass> = Vec::new();
    'next: for s in samples {
        if s.is_valid() {
            for c in classes.iter_mut().filter(|c| c.is_valid) {
                let same = oracle
                    .equivalent(&c.representative, s)
                    .map_err(|source| DistributionError::Oracle {
                        first: c.representative.sample_index,
                        second: s.sample_index,
                        source,
                    })?;
                if same {
                    c.member_indices.insert(s.sample_index);
                    continue 'next;
                }
            }
        }
        classes.push(MeaningClass {
            class_id: classes.len(),
            representative: s.clone(),
            member_indices: BTreeSet::from([s.sample_index]),
            is_valid: s.is_valid(),
        });
    }
    Ok(classes)
}

pub fn distribution(input_id: &str, classes: Vec<MeaningClass>) -> EmpiricalDistribution {
    let classes: Vec<(MeaningClass, usize)> = classes
        .into_iter()
        .map(|c| {
            let n = c.member_indices.len();
            (c, n)
        })
        .collect();
    let total_samples = classes.iter().map(|(_, n)| n).sum();
    EmpiricalDistribution {
        input_id: input_id.to_string(),
        classes,
        total_samples,
    }
}

/// The largest class holds at least half the mass.
pub fn is_concentrated(d: &EmpiricalDistribution) -> Result<bool, DistributionError> {
    if d.total_samples == 0 {
        return Err(DistributionError::Empty);
    }
    Ok(2 * d.max_count() >= d.total_samples)
}

/// Id of the class equivalent to `groundtruth`, if one was generated.
/// Invalid classes are never correct.
pub fn correct_class(
    d: &EmpiricalDistribution,
    groundtruth: &OutputSample,
    oracle: &dyn EquivalenceOracle,
) -> Result<Option<usize>, DistributionError> {
    for (c, _) in d.classes.iter().filter(|(c, _)| c.is_valid) {
        let same = oracle
            .equivalent(&c.representative, groundtruth)
            .map_err(|source| DistributionError::Oracle {
                first: c.representative.sample_index,
                second: groundtruth.sample_index,
                source,
            })?;
        if same {
            return Ok(Some(c.class_id));
        }
    }
    Ok(None)
}

fn argmax_ids(d: &EmpiricalDistribution) -> Vec<usize> {
    let max = d.max_count();
    d.classes.iter().filter(|(_, n)| *n == max).map(|(c, _)| c.class_id).collect()
}

pub fn alignment_status(
    d: &EmpiricalDistribution,
    groundtruth: &OutputSample,
    oracle: &dyn EquivalenceOracle,
) -> Result<Alignment, DistributionError> {
    Ok(verdict(d, groundtruth, oracle)?.alignment)
}

/// Alignment and concentration together. When several classes share the
/// maximal count the correct one, if among them, is reported as winner;
/// otherwise the one generated first.
pub fn verdict(
    d: &EmpiricalDistribution,
    groundtruth: &OutputSample,
    oracle: &dyn EquivalenceOracle,
) -> Result<Verdict, DistributionError> {
    let concentrated = is_concentrated(d)?;
    let correct = correct_class(d, groundtruth, oracle)?;
    let top = argmax_ids(d);
    let (alignment, winner) = match correct {
        Some(id) if top.contains(&id) => (Alignment::Aligned, id),
        Some(_) => (Alignment::MisalignedCorrectGenerated, top[0]),
        None => (Alignment::CorrectNotGenerated, top[0]),
    };
    Ok(Verdict {
        alignment,
        concentration: if concentrated {
            Concentration::Concentrated
        } else {
            Concentration::NotConcentrated
        },
        winning_class_id: winner,
        winner_tied: top.len() > 1,
    })
}

/// Shannon entropy of the class frequencies, in nats.
pub fn entropy(d: &EmpiricalDistribution) -> f64 {
    if d.total_samples == 0 {
        return 0.0;
    }
    let n = d.total_samples as f64;
    d.classes
        .iter()
        .filter(|(_, c)| *c > 0)
        .map(|(_, c)| {
            let p = *c as f64 / n;
            -p * p.ln()
        })
        .sum::<f64>()
        .max(0.0)
}
