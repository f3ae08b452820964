//! The pointwise improvement relation between two campaign reports.

use super::report::CampaignReport;
use crate::distribution::{Alignment, Concentration, Verdict};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImprovementReport {
    pub ac_base: BTreeSet<String>,
    pub ac_new: BTreeSet<String>,
    pub cm_base: BTreeSet<String>,
    pub cm_new: BTreeSet<String>,
    /// Aligned in the base report, not aligned (or without verdict) in the new one.
    pub regressions: BTreeSet<String>,
    pub improves: bool,
    pub strictly_improves: bool,
    /// `AC_base ⊆ AC_new`.
    pub ac_included: bool,
    /// `CM_new ⊆ CM_base`, the set reading of "fewer adversarial cases".
    pub cm_included: bool,
    /// Aligned-and-concentrated in the base, not in the new report.
    pub ac_regressions: BTreeSet<String>,
    /// The relation with non-regression checked only over
    /// aligned-and-concentrated inputs.
    pub improves_ac_only: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompareError {
    #[error("reports cover different datasets: {0} vs {1}")]
    DatasetMismatch(String, String),
    #[error("reports use different oracles: {0} vs {1}")]
    OracleMismatch(String, String),
}

fn select(r: &CampaignReport, f: impl Fn(&Verdict) -> bool) -> BTreeSet<String> {
    r.verdicts().filter(|(_, v)| f(v)).map(|(id, _)| id.to_string()).collect()
}

fn ac(v: &Verdict) -> bool {
    v.alignment == Alignment::Aligned && v.concentration == Concentration::Concentrated
}

fn cm(v: &Verdict) -> bool {
    v.alignment != Alignment::Aligned && v.concentration == Concentration::Concentrated
}

pub fn compare(base: &CampaignReport, new: &CampaignReport) -> Result<ImprovementReport, CompareError> {
    if base.dataset_id != new.dataset_id {
        return Err(CompareError::DatasetMismatch(base.dataset_id.clone(), new.dataset_id.clone()));
    }
    if base.oracle != new.oracle {
        return Err(CompareError::OracleMismatch(base.oracle.to_string(), new.oracle.to_string()));
    }
    let aligned_base = select(base, |v| v.alignment == Alignment::Aligned);
    let aligned_new = select(new, |v| v.alignment == Alignment::Aligned);
    let regressions: BTreeSet<String> = aligned_base.difference(&aligned_new).cloned().collect();
    let (ac_base, ac_new) = (select(base, ac), select(new, ac));
    let (cm_base, cm_new) = (select(base, cm), select(new, cm));
    let ac_included = ac_base.is_subset(&ac_new);
    let cm_included = cm_new.is_subset(&cm_base);
    let ac_regressions: BTreeSet<String> = ac_base.difference(&ac_new).cloned().collect();
    let fewer_cm = cm_new.len() <= cm_base.len();
    let improves = ac_included && fewer_cm && regressions.is_empty();
    let strictly_improves = improves && (ac_new.len() > ac_base.len() || cm_new.len() < cm_base.len());
    Ok(ImprovementReport {
        improves_ac_only: ac_included && fewer_cm,
        ac_base,
        ac_new,
        cm_base,
        cm_new,
        regressions,
        improves,
        strictly_improves,
        ac_included,
        cm_included,
        ac_regressions,
    })
}

impl ImprovementReport {
    pub fn render_text(&self) -> String {
        let list = |s: &BTreeSet<String>| {
            if s.is_empty() {
                "none".to_string()
            } else {
                s.iter().cloned().collect::<Vec<_>>().join(", ")
            }
        };
        format!(
            "improves: {}\nstrictly improves: {}\nAC: {} → {}\nCM: {} → {}\nregressions: {}\nAC_base ⊆ AC_new: {}\nCM_new ⊆ CM_base: {}\n",
            self.improves,
            self.strictly_improves,
            self.ac_base.len(),
            self.ac_new.len(),
            self.cm_base.len(),
            self.cm_new.len(),
            list(&self.regressions),
            self.ac_included,
            self.cm_included,
        )
    }
}
