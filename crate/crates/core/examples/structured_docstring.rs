//! Sentence classification of a docstring into precondition,
//! postcondition and context blocks.

use std::path::Path;
use tmprob::campaign::load_dataset;
use tmprob::tm::{TMConfig, Tm};

fn main() {
    let fx = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let ds = load_dataset(&fx.join("dataset.json")).unwrap();
    let tm = Tm::new(TMConfig::load(&fx.join("structured_tm.json")).unwrap()).unwrap();
    for id in ["linear_search1", "online_max", "abs"] {
        let case = ds.cases.iter().find(|c| c.id == id).unwrap();
        println!("{id}: {}\n", case.docstring);
        println!("{}\n", tm.preprocess_docstring(case, 0).unwrap());
    }
}
