//! A candidate that forgets the first-appearance requirement is a weak
//! postcondition.

use tmprob::spec_lang::{diagnose, parse_signature, parse_spec, EvaluationBounds};

fn main() {
    let sig = parse_signature("method LinearSearch(a: seq<int>, e: int) returns (r: int)").unwrap();
    let gt = parse_spec(
        "requires exists i :: 0 <= i < |a| && a[i] == e;
         ensures 0 <= r < |a| && a[r] == e && (forall j :: 0 <= j < r ==> a[j] != e);",
        &sig,
    )
    .unwrap();
    let candidates = [
        "requires exists i :: 0 <= i < |a| && a[i] == e; ensures 0 <= r < |a| && a[r] == e;",
        "ensures 0 <= r < |a| && a[r] == e && (forall j :: 0 <= j < r ==> a[j] != e);",
        "requires exists i :: 0 <= i < |a| && a[i] == e; ensures r == |a|;",
        "requires exists i :: 0 <= i < |a| && a[i] == e ensures r == 0;",
    ];
    let bounds = EvaluationBounds::default();
    for text in candidates {
        let cand = parse_spec(text, &sig);
        let d = diagnose(cand.as_ref(), &gt, &sig, &bounds).unwrap();
        println!("{:<14} {:?}\n    {text}", d.primary.to_string(), d.labels);
    }
}
