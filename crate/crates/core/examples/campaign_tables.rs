//! Run the baseline and restructured-docstring fixtures, print both grids,
//! the mistake breakdown and the improvement verdict.

use std::path::Path;
use tmprob::campaign::{compare, load_dataset, render_grid, render_mistakes, run_campaign, Format};
use tmprob::oracle::OracleKind;
use tmprob::tm::{TMConfig, Tm};

fn main() {
    let fx = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let ds = load_dataset(&fx.join("dataset.json")).unwrap();
    let reports: Vec<_> = ["baseline_tm.json", "structured_tm.json"]
        .iter()
        .map(|name| {
            let tm = Tm::new(TMConfig::load(&fx.join(name)).unwrap()).unwrap();
            run_campaign(&tm, &ds, OracleKind::default())
        })
        .collect();
    for r in &reports {
        println!("== {} on {}\n", r.tm_id, r.dataset_id);
        println!("{}", render_grid(&r.grid, Format::Text));
        println!("{}", render_mistakes(&r.mistake_breakdown, Format::Text));
    }
    print!("{}", compare(&reports[0], &reports[1]).unwrap().render_text());
}
