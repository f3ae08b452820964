//! Campaigns: run a model over a dataset, turn each input's samples into a
//! verdict, aggregate the verdict grid and mistake breakdown, and compare
//! two campaigns for improvement.

pub mod compare;
pub mod dataset;
pub mod report;
pub mod summarize;

pub use compare::{compare, CompareError, ImprovementReport};
pub use dataset::{cases_from_records, load_dataset, CaseRecord, Dataset, DatasetError, GroundtruthRecord};
pub use report::{analyze_input, mistake_breakdown, run_campaign, CampaignReport, Grid, InputResult, InputStatus, Row};
pub use summarize::{parse_grid_csv, render_grid, render_mistakes, summarize, Format};
