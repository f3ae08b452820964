//! Cluster sampled outputs into meaning classes under the three oracles
//! and judge the distribution against a reference.

use tmprob::distribution::{cluster, distribution, entropy, verdict, OutputSample};
use tmprob::oracle::{OracleKind, SpecOracle};
use tmprob::spec_lang::{parse_signature, parse_spec};

fn main() {
    let sig = parse_signature("method Inc(x: int) returns (r: int)").unwrap();
    let texts = [
        "ensures r == x + 1;",
        "ensures r - 1 == x;",
        "ensures  r == x + 1 ;",
        "ensures r > x;",
        "ensures x + 1 == r;",
        "ensures r == ;",
    ];
    let samples: Vec<OutputSample> =
        texts.iter().enumerate().map(|(i, t)| OutputSample::parsed(i, t, &sig, 0, "example")).collect();
    let gt_text = "ensures r == x + 1;";
    let gt = OutputSample::reference(gt_text, parse_spec(gt_text, &sig).unwrap());

    for kind in [OracleKind::ExactText, OracleKind::NormalizedText, OracleKind::default()] {
        let oracle = SpecOracle::new(kind, sig.clone());
        let d = distribution("inc", cluster(&samples, &oracle).unwrap());
        let v = verdict(&d, &gt, &oracle).unwrap();
        println!("{kind}");
        for (c, n) in &d.classes {
            println!("  class {} x{n}: {}", c.class_id, c.representative.raw_text);
        }
        println!("  {:?} / {:?}, entropy {:.3}\n", v.alignment, v.concentration, entropy(&d));
    }
}
