//! Probabilistic evaluation of specification-writing models.
//!
//! A model translating docstrings into requires/ensures specifications is
//! sampled repeatedly per input. The samples are grouped into meaning
//! classes by an equivalence oracle, and the resulting empirical
//! distribution is judged on alignment (is the correct class the most
//! likely one) and concentration (does one class hold at least half the
//! mass).
//!
//! - [`spec_lang`]: parser, typechecker, bounded evaluator and mistake diagnosis
//! - [`oracle`]: exact, normalized and semantic equivalence
//! - [`distribution`]: clustering, entropy and verdicts
//! - [`tm`]: prompting pipeline and model backends
//! - [`campaign`]: dataset runs, reports and comparisons
//! - [`cli`]: the `tmprob` command line

pub mod campaign;
pub mod cli;
pub mod distribution;
pub mod oracle;
pub mod spec_lang;
pub mod tm;
