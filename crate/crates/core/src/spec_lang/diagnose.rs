//! Classifies how a candidate spec deviates from a reference spec using
//! the usual formalization-mistake vocabulary (weak/strong/incorrect
//! pre- and post-conditions, syntax errors).

use super::ast::{Signature, SpecPair};
use super::bounded::{implication_counterexample, BoundedError, EvaluationBounds};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MistakeLabel {
    Equivalent,
    SyntaxError,
    WeakPre,
    StrongPre,
    IncorrectPre,
    WeakPost,
    StrongPost,
    IncorrectPost,
}

impl MistakeLabel {
    pub const ALL: [MistakeLabel; 8] = [
        MistakeLabel::WeakPost,
        MistakeLabel::StrongPost,
        MistakeLabel::IncorrectPost,
        MistakeLabel::SyntaxError,
        MistakeLabel::WeakPre,
        MistakeLabel::StrongPre,
        MistakeLabel::IncorrectPre,
        MistakeLabel::Equivalent,
    ];

    pub fn description(self) -> &'static str {
        match self {
            MistakeLabel::Equivalent => "Equivalent",
            MistakeLabel::SyntaxError => "Syntax error",
            MistakeLabel::WeakPre => "Weak pre-condition",
            MistakeLabel::StrongPre => "Strong pre-condition",
            MistakeLabel::IncorrectPre => "Incorrect pre-condition",
            MistakeLabel::WeakPost => "Weak post-condition",
            MistakeLabel::StrongPost => "Strong post-condition",
            MistakeLabel::IncorrectPost => "Incorrect post-condition",
        }
    }
}

impl fmt::Display for MistakeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnosis {
    pub primary: MistakeLabel,
    /// Every label that applies, pre-condition label first.
    pub labels: Vec<MistakeLabel>,
}

impl Diagnosis {
    fn single(label: MistakeLabel) -> Self {
        Self {
            primary: label,
            labels: vec![label],
        }
    }
}

fn classify(forward: bool, backward: bool, weak: MistakeLabel, strong: MistakeLabel, incorrect: MistakeLabel) -> Option<MistakeLabel> {
    match (forward, backward) {
        (true, true) => None,
        (true, false) => Some(weak),
        (false, true) => Some(strong),
        (false, false) => Some(incorrect),
    }
}

/// Diagnoses `candidate` against `groundtruth`. A parse failure of the
/// candidate is passed as `Err` and always yields `SyntaxError`.
///
/// Preconditions are compared directly: "weak" means the reference
/// precondition implies the candidate's but not conversely. Postconditions
/// are compared under the reference precondition, with "weak" meaning the
/// reference postcondition implies the candidate's but not conversely.
pub fn diagnose<E>(
    candidate: Result<&SpecPair, E>,
    groundtruth: &SpecPair,
    sig: &Signature,
    bounds: &EvaluationBounds,
) -> Result<Diagnosis, BoundedError> {
    let Ok(cand) = candidate else {
        return Ok(Diagnosis::single(MistakeLabel::SyntaxError));
    };
    let holds = |hyp: &[_], l: &[_], r: &[_]| -> Result<bool, BoundedError> {
        Ok(implication_counterexample(hyp, l, r, sig, bounds)?.is_none())
    };
    let gt_pre = &groundtruth.preconditions;
    let c_pre = &cand.preconditions;
    let pre = classify(
        holds(&[], gt_pre, c_pre)?,
        holds(&[], c_pre, gt_pre)?,
        MistakeLabel::WeakPre,
        MistakeLabel::StrongPre,
        MistakeLabel::IncorrectPre,
    );
    let gt_post = &groundtruth.postconditions;
    let c_post = &cand.postconditions;
    let post = classify(
        holds(gt_pre, gt_post, c_post)?,
        holds(gt_pre, c_post, gt_post)?,
        MistakeLabel::WeakPost,
        MistakeLabel::StrongPost,
        MistakeLabel::IncorrectPost,
    );
    let labels: Vec<MistakeLabel> = pre.into_iter().chain(post).collect();
    Ok(match labels.first() {
        None => Diagnosis::single(MistakeLabel::Equivalent),
        Some(&primary) => Diagnosis { primary, labels },
    })
}
