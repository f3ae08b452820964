use super::dataset::Dataset;
use crate::distribution::{cluster, distribution, entropy, verdict, Alignment, Concentration, EmpiricalDistribution, OutputSample, Verdict};
use crate::oracle::{OracleKind, SpecOracle};
use crate::spec_lang::{diagnose, Diagnosis, EvaluationBounds, MistakeLabel};
use crate::tm::{Preprocessing, SamplingParams, Tm, InputCase};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: u32 = 1;

pub const SENTENCE_RULE: &str = "split after '.', '!' or '?' followed by whitespace";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Row {
    pub concentrated: usize,
    pub not_concentrated: usize,
}

impl Row {
    pub fn get(&self, c: Concentration) -> usize {
        match c {
            Concentration::Concentrated => self.concentrated,
            Concentration::NotConcentrated => self.not_concentrated,
        }
    }

    fn bump(&mut self, c: Concentration) {
        match c {
            Concentration::Concentrated => self.concentrated += 1,
            Concentration::NotConcentrated => self.not_concentrated += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.concentrated + self.not_concentrated
    }
}

/// Verdict counts: alignment rows by concentration columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Grid {
    pub aligned: Row,
    pub misaligned_correct_generated: Row,
    pub correct_not_generated: Row,
}

impl Grid {
    pub fn row(&self, a: Alignment) -> &Row {
        match a {
            Alignment::Aligned => &self.aligned,
            Alignment::MisalignedCorrectGenerated => &self.misaligned_correct_generated,
            Alignment::CorrectNotGenerated => &self.correct_not_generated,
        }
    }

    fn row_mut(&mut self, a: Alignment) -> &mut Row {
        match a {
            Alignment::Aligned => &mut self.aligned,
            Alignment::MisalignedCorrectGenerated => &mut self.misaligned_correct_generated,
            Alignment::CorrectNotGenerated => &mut self.correct_not_generated,
        }
    }

    pub fn get(&self, a: Alignment, c: Concentration) -> usize {
        self.row(a).get(c)
    }

    pub fn total(&self) -> usize {
        Alignment::ALL.iter().map(|a| self.row(*a).total()).sum()
    }

    pub fn misaligned(&self) -> usize {
        self.total() - self.aligned.total()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub class_id: usize,
    pub count: usize,
    pub valid: bool,
    pub representative: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parse_error: Option<String>,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum InputStatus {
    Complete,
    /// No reference spec: distribution only, no verdict.
    NoGroundtruth,
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputResult {
    pub status: InputStatus,
    pub total_samples: usize,
    pub classes: Vec<ClassSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entropy: Option<f64>,
    /// Diagnosis of the winning class against the reference, for
    /// misaligned inputs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mistake: Option<Diagnosis>,
    pub retries_used: u64,
}

impl InputResult {
    fn failed(error: String) -> Self {
        Self {
            status: InputStatus::Failed { error },
            total_samples: 0,
            classes: Vec::new(),
            verdict: None,
            entropy: None,
            mistake: None,
            retries_used: 0,
        }
    }
}

pub type MistakeBreakdown = BTreeMap<MistakeLabel, Row>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub schema_version: u32,
    pub tm_id: String,
    pub dataset_id: String,
    pub sampling: SamplingParams,
    pub oracle: OracleKind,
    /// Set when equivalence was decided over bounded domains.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounded: Option<String>,
    pub preprocessing: Preprocessing,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentence_splitting: Option<String>,
    pub per_input: BTreeMap<String, InputResult>,
    pub grid: Grid,
    pub mistake_breakdown: MistakeBreakdown,
    pub incomplete_inputs: Vec<String>,
}

impl CampaignReport {
    /// Pretty JSON with object keys in sorted order.
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn verdicts(&self) -> impl Iterator<Item = (&str, &Verdict)> {
        self.per_input.iter().filter_map(|(id, r)| r.verdict.as_ref().map(|v| (id.as_str(), v)))
    }
}

fn summarize_classes(d: &EmpiricalDistribution) -> Vec<ClassSummary> {
    d.classes
        .iter()
        .map(|(c, n)| ClassSummary {
            class_id: c.class_id,
            count: *n,
            valid: c.is_valid,
            representative: c.representative.raw_text.clone(),
            parse_error: c.representative.parse_error().map(str::to_string),
            members: c.member_indices.iter().copied().collect(),
        })
        .collect()
}

/// Clusters one input's samples and judges them against its reference.
pub fn analyze_input(input: &InputCase, samples: &[OutputSample], oracle_kind: OracleKind) -> InputResult {
    let oracle = SpecOracle::new(oracle_kind, input.signature.clone());
    let retries_used = samples.iter().map(|s| s.retries_used as u64).sum();
    let classes = match cluster(samples, &oracle) {
        Ok(c) => c,
        Err(e) => return InputResult::failed(e.to_string()),
    };
    let d = distribution(&input.id, classes);
    let mut out = InputResult {
        status: InputStatus::NoGroundtruth,
        total_samples: d.total_samples,
        classes: summarize_classes(&d),
        verdict: None,
        entropy: Some(entropy(&d)),
        mistake: None,
        retries_used,
    };
    let Some((gt, gt_text)) = &input.groundtruth else {
        return out;
    };
    let reference = OutputSample::reference(gt_text, gt.clone());
    let v = match verdict(&d, &reference, &oracle) {
        Ok(v) => v,
        Err(e) => return InputResult::failed(e.to_string()),
    };
    if v.alignment != Alignment::Aligned {
        let winner = &d.classes.iter().find(|(c, _)| c.class_id == v.winning_class_id).expect("winner exists").0;
        let bounds = oracle_kind.bounds().unwrap_or_default();
        match diagnose(winner.representative.spec().ok_or(()), gt, &input.signature, &bounds) {
            Ok(diag) => out.mistake = Some(diag),
            Err(e) => return InputResult::failed(format!("diagnosis: {e}")),
        }
    }
    out.verdict = Some(v);
    out.status = InputStatus::Complete;
    out
}

pub fn mistake_breakdown(per_input: &BTreeMap<String, InputResult>) -> MistakeBreakdown {
    let mut out: MistakeBreakdown = MistakeLabel::ALL.iter().map(|l| (*l, Row::default())).collect();
    for r in per_input.values() {
        if let (Some(v), Some(m)) = (&r.verdict, &r.mistake) {
            out.get_mut(&m.primary).expect("all labels present").bump(v.concentration);
        }
    }
    out
}

pub fn grid(per_input: &BTreeMap<String, InputResult>) -> Grid {
    let mut g = Grid::default();
    for r in per_input.values() {
        if let Some(v) = &r.verdict {
            g.row_mut(v.alignment).bump(v.concentration);
        }
    }
    g
}

/// Assembles a report from per-input results.
pub fn assemble(
    tm_id: &str,
    dataset_id: &str,
    sampling: SamplingParams,
    oracle: OracleKind,
    preprocessing: Preprocessing,
    per_input: BTreeMap<String, InputResult>,
) -> CampaignReport {
    let incomplete_inputs = per_input
        .iter()
        .filter(|(_, r)| matches!(r.status, InputStatus::Failed { .. }))
        .map(|(id, _)| id.clone())
        .collect();
    CampaignReport {
        schema_version: SCHEMA_VERSION,
        tm_id: tm_id.to_string(),
        dataset_id: dataset_id.to_string(),
        sampling,
        oracle,
        bounded: oracle.bounds().map(|b: EvaluationBounds| b.to_string()),
        preprocessing,
        sentence_splitting: (preprocessing == Preprocessing::StructuredDocstring).then(|| SENTENCE_RULE.to_string()),
        grid: grid(&per_input),
        mistake_breakdown: mistake_breakdown(&per_input),
        per_input,
        incomplete_inputs,
    }
}

/// Samples, clusters and judges every input. Inputs run concurrently on
/// the current rayon pool; a failing input is recorded, not fatal.
pub fn run_campaign(tm: &Tm, dataset: &Dataset, oracle: OracleKind) -> CampaignReport {
    let per_input: BTreeMap<String, InputResult> = dataset
        .cases
        .par_iter()
        .map(|case| {
            let result = match tm.sample_tm(case) {
                Ok(samples) => analyze_input(case, &samples, oracle),
                Err(e) => InputResult::failed(e.to_string()),
            };
            (case.id.clone(), result)
        })
        .collect();
    assemble(
        &tm.config.tm_id,
        &dataset.id,
        tm.config.sampling,
        oracle,
        tm.config.preprocessing,
        per_input,
    )
}
