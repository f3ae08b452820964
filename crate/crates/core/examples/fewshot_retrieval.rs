//! Retrieve the closest stored examples for a docstring.

use std::path::Path;
use tmprob::tm::FewShotStore;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/fewshot.json");
    let store = FewShotStore::load(&path).unwrap();
    let query = "Checks whether every element of a is negative. Returns r true exactly when all elements are below zero.";
    let sims = store.similarities(query);
    for (e, s) in store.entries().iter().zip(&sims) {
        println!("{s:.3}  {}", e.docstring);
    }
    println!("\ntop 2:");
    for e in store.retrieve(query, 2) {
        println!("{}\n{}\n", e.signature, e.spec);
    }
}
