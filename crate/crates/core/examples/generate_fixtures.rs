//! Regenerates the simulated translation-model fixtures.
//!
//! Each case gets a small candidate distribution built from its reference
//! spec plus a scripted mistake. Weights are jittered deterministically
//! until the sampled campaign puts the case in its target cell, so the
//! checked-in configs reproduce the expected grids exactly.
//!
//! ```text
//! cargo run --release --example generate_fixtures
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use tmprob::campaign::{analyze_input, load_dataset, run_campaign, CaseRecord, GroundtruthRecord};
use tmprob::distribution::{Alignment, Concentration};
use tmprob::oracle::OracleKind;
use tmprob::spec_lang::MistakeLabel;
use tmprob::tm::{
    split_sentences, BackendConfig, Candidate, FewShotEntry, InputCase, Preprocessing, SimulatedConfig,
    SimulatedInput, SimulatedMode, TMConfig, Tm,
};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Cell {
    Ac,
    Anc,
    McgC,
    CngC,
    McgNc,
    CngNc,
    /// Correct class absent, roughly flat over twenty classes.
    Twenty,
}

impl Cell {
    fn expected(self) -> (Alignment, Concentration) {
        use Alignment::*;
        use Concentration::*;
        match self {
            Cell::Ac => (Aligned, Concentrated),
            Cell::Anc => (Aligned, NotConcentrated),
            Cell::McgC => (MisalignedCorrectGenerated, Concentrated),
            Cell::CngC => (CorrectNotGenerated, Concentrated),
            Cell::McgNc => (MisalignedCorrectGenerated, NotConcentrated),
            Cell::CngNc | Cell::Twenty => (CorrectNotGenerated, NotConcentrated),
        }
    }
}

#[derive(Clone, Copy)]
struct Target {
    cell: Cell,
    mistake: Option<(MistakeLabel, &'static str)>,
}

const AC: Target = Target { cell: Cell::Ac, mistake: None };
const ANC: Target = Target { cell: Cell::Anc, mistake: None };

const LINEAR_SEARCH_WEAK: &str = "requires exists i :: 0 <= i < |a| && a[i] == e;\n\
ensures 0 <= r < |a| && a[r] == e;";
const QUOTIENT_STRONG_PRE: &str = "requires y > 0;\nrequires x > 0;\n\
ensures q * y + r == x;\nensures 0 <= r < y;\nensures 0 <= q;";
const FIND_WEAK: &str = "ensures -1 <= index < |a|;\n\
ensures index != -1 ==> a[index] == key;\n\
ensures index == -1 ==> (forall j :: 0 <= j < |a| ==> a[j] != key);";
const BINARY_SEARCH_WEAK: &str = "requires forall i :: forall j :: 0 <= i < j < |a| ==> a[i] <= a[j];\n\
ensures 0 <= n <= |a|;\nensures forall i :: 0 <= i < n ==> a[i] < key;";
const CAL_SUM_WRONG: &str = "requires n >= 0;\nensures s == n * (n - 1) / 2;";
const ISQRT_NO_PRE: &str = "ensures 0 <= r;\nensures r * r <= n;\nensures n < (r + 1) * (r + 1);";
const ONLINE_MAX_WEAK: &str = "requires 1 <= x < |a|;\n\
ensures x <= p < |a|;\n\
ensures forall i :: 0 <= i < x ==> a[i] <= m;\n\
ensures forall i :: x <= i < p ==> a[i] <= m;\n\
ensures p < |a| - 1 ==> a[p] > m;\n\
ensures (forall i :: x <= i < |a| ==> a[i] <= m) ==> p == |a| - 1;";
const MAX_ARRAY_WEAK: &str = "requires |a| > 0;\nensures forall j :: 0 <= j < |a| ==> a[j] <= m;";
const TWO_SUM_WRONG: &str = "requires exists p :: exists q :: 0 <= p < q < |a| && a[p] + a[q] == target;\n\
ensures 0 <= i < |a| && 0 <= j < |a|;\nensures a[i] - a[j] == target;";
const COPY_PART_WEAK: &str = "requires 0 <= start <= |a|;\nensures |b| <= |a| - start;\n\
ensures forall j :: 0 <= j < |b| ==> b[j] == a[start + j];";
const MODIFY_2D_PRE: &str = "requires 0 <= i;\nrequires 0 <= j < 2;\nrequires i * 2 + j < |a|;\n";
const MODIFY_2D_TRANSPOSED: &str = "requires 0 <= i;\nrequires 0 <= j < 2;\nrequires i * 2 + j < |a|;\n\
ensures |b| == |a|;\nensures b[j * 2 + i] == 0;\n\
ensures forall k :: 0 <= k < |a| && k != j * 2 + i ==> b[k] == a[k];";

fn targets(id: &str) -> (Target, Target) {
    use MistakeLabel::*;
    let t = |cell, label, text| Target { cell, mistake: Some((label, text)) };
    match id {
        "linear_search1" => (t(Cell::McgC, WeakPost, LINEAR_SEARCH_WEAK), AC),
        "quotient" => (t(Cell::McgC, StrongPre, QUOTIENT_STRONG_PRE), AC),
        "find" => (t(Cell::CngC, WeakPost, FIND_WEAK), AC),
        "binary_search" => (t(Cell::CngC, WeakPost, BINARY_SEARCH_WEAK), AC),
        "cal_sum" => (t(Cell::CngC, IncorrectPost, CAL_SUM_WRONG), AC),
        "integer_square_root" => (t(Cell::CngC, WeakPre, ISQRT_NO_PRE), AC),
        "online_max" => (t(Cell::McgNc, WeakPost, ONLINE_MAX_WEAK), t(Cell::CngC, WeakPost, ONLINE_MAX_WEAK)),
        "max_array" => (t(Cell::McgNc, WeakPost, MAX_ARRAY_WEAK), AC),
        "two_sum" => (t(Cell::McgNc, IncorrectPost, TWO_SUM_WRONG), AC),
        "has_close_elements" | "canyon_search" => {
            let s = t(Cell::CngNc, SyntaxError, "");
            (s, s)
        }
        "copy_part" => (t(Cell::CngNc, WeakPost, COPY_PART_WEAK), AC),
        "modify_2d_array" => (
            t(Cell::Twenty, IncorrectPost, MODIFY_2D_TRANSPOSED),
            t(Cell::CngC, IncorrectPost, MODIFY_2D_TRANSPOSED),
        ),
        "clamp" | "swap_in_array" => (ANC, AC),
        "longest_prefix" => (ANC, ANC),
        _ => (AC, AC),
    }
}

fn spec_text(requires: &[String], ensures: &[String]) -> String {
    GroundtruthRecord {
        requires: requires.to_vec(),
        ensures: ensures.to_vec(),
    }
    .to_spec_text()
}

struct Variants {
    gt: String,
    paren: String,
    weak: String,
    strong: String,
    negated: String,
    invalid: Vec<String>,
}

fn variants(g: &GroundtruthRecord) -> Variants {
    let wrap = |v: &[String]| v.iter().map(|e| format!("({e})")).collect::<Vec<_>>();
    let (req, ens) = (&g.requires, &g.ensures);
    let mut negated_ens = ens.clone();
    if let Some(last) = negated_ens.last_mut() {
        *last = format!("!({last})");
    }
    let last = ens.last().cloned().unwrap_or_else(|| "true".into());
    Variants {
        gt: g.to_spec_text(),
        paren: spec_text(&wrap(req), &wrap(ens)),
        weak: spec_text(req, &ens[..ens.len().saturating_sub(1)]),
        strong: format!("{}\nensures false;", g.to_spec_text()),
        negated: spec_text(req, &negated_ens),
        invalid: vec![
            format!("ensures {last} &&;"),
            format!("ensures ({last};"),
            format!("ensures {last} == undefined_name;"),
            format!("ensures result == {last};"),
        ],
    }
}

fn cands(items: &[(&str, f64)]) -> Vec<Candidate> {
    items
        .iter()
        .map(|(t, w)| Candidate {
            text: t.to_string(),
            weight: *w,
        })
        .collect()
}

fn modify_2d_twenty() -> SimulatedInput {
    let post = |ens: &[&str]| {
        let mut s = MODIFY_2D_PRE.to_string();
        for e in ens {
            s.push_str(&format!("ensures {e};\n"));
        }
        s.trim_end().to_string()
    };
    let keep = "forall k :: 0 <= k < |a| && k != i * 2 + j ==> b[k] == a[k]";
    let wrong: Vec<String> = vec![
        post(&["|b| == |a|", "b[i * 2 + j] == 0"]),
        post(&["|b| == |a|", "b[i * 2 + j] == a[i * 2 + j]", keep]),
        post(&["b[i * 2 + j] == 0", keep]),
        post(&["|b| == |a|", "b[i * 2 + j] == 1", keep]),
        post(&["|b| == |a|", "b[i * 2 + j] == 0", "forall k :: 0 <= k < |a| ==> b[k] == a[k]"]),
        format!(
            "requires 0 <= i;\nrequires i * 2 + j < |a|;\nensures |b| == |a|;\nensures b[i * 2 + j] == 0;\nensures {keep};"
        ),
        post(&["|b| == |a| + 1", "b[i * 2 + j] == 0", keep]),
        post(&["|b| == |a|", "b[0] == 0", keep]),
        post(&["|b| == |a|", "b[i * 2 + j] <= 0", keep]),
    ];
    let invalid: Vec<String> = (0..10)
        .map(|n| format!("{MODIFY_2D_PRE}ensures b[i * 2 + j] == 0;\nensures b[a{n}] ==;"))
        .collect();
    let mut items: Vec<(&str, f64)> = vec![(MODIFY_2D_TRANSPOSED, 4.0)];
    for (n, w) in wrong.iter().enumerate() {
        items.push((w, if n < 7 { 2.0 } else { 1.0 }));
    }
    for s in &invalid {
        items.push((s, 1.0));
    }
    SimulatedInput {
        mode: SimulatedMode::Cycle,
        attempts: vec![cands(&items)],
    }
}

fn base_weights(v: &Variants, t: Target) -> (Vec<(String, f64)>, Option<Vec<(String, f64)>>) {
    let m = t.mistake.map(|(_, s)| s.to_string()).unwrap_or_default();
    let inv = |i: usize| v.invalid[i].clone();
    let w = |items: &[(&String, f64)]| items.iter().map(|(s, w)| ((*s).clone(), *w)).collect::<Vec<_>>();
    match t.cell {
        Cell::Ac => (
            w(&[(&v.gt, 0.5), (&v.paren, 0.25), (&v.weak, 0.15), (&inv(0), 0.1)]),
            Some(w(&[(&v.gt, 0.55), (&v.paren, 0.3), (&v.weak, 0.15)])),
        ),
        Cell::Anc => (
            w(&[(&v.gt, 0.34), (&v.weak, 0.2), (&v.strong, 0.2), (&v.negated, 0.2), (&inv(1), 0.06)]),
            None,
        ),
        Cell::McgC => (w(&[(&m, 0.6), (&v.gt, 0.25), (&v.strong, 0.15)]), None),
        Cell::CngC => (w(&[(&m, 0.75), (&v.strong, 0.15), (&inv(2), 0.1)]), None),
        Cell::McgNc => (
            w(&[(&m, 0.3), (&v.gt, 0.2), (&v.strong, 0.15), (&v.negated, 0.15), (&inv(0), 0.1), (&inv(3), 0.1)]),
            None,
        ),
        Cell::CngNc if t.mistake.map(|(l, _)| l) == Some(MistakeLabel::SyntaxError) => {
            (w(&[(&inv(0), 0.3), (&inv(1), 0.3), (&inv(2), 0.2), (&inv(3), 0.2)]), None)
        }
        Cell::CngNc => (
            w(&[(&m, 0.25), (&v.strong, 0.21), (&v.negated, 0.21), (&inv(0), 0.18), (&inv(2), 0.15)]),
            Some(w(&[(&inv(1), 0.5), (&inv(3), 0.5)])),
        ),
        Cell::Twenty => unreachable!("scripted separately"),
    }
}

fn jitter(items: &[(String, f64)], rng: &mut ChaCha8Rng, amount: f64) -> Vec<Candidate> {
    items
        .iter()
        .map(|(t, w)| Candidate {
            text: t.clone(),
            weight: ((w * (1.0 + amount * (rng.random::<f64>() - 0.5))) * 1000.0).round() / 1000.0,
        })
        .collect()
}

fn simulated(inputs: BTreeMap<String, SimulatedInput>, labels: BTreeMap<String, String>) -> BackendConfig {
    BackendConfig::Simulated(SimulatedConfig {
        backend_id: "simulated".into(),
        inputs,
        fallback: None,
        echo_groundtruth: false,
        sentence_labels: labels,
    })
}

fn tm_config(tm_id: &str, backend: BackendConfig, pre: Preprocessing) -> TMConfig {
    let mut c = TMConfig::new(tm_id, backend);
    c.preprocessing = pre;
    c.fewshot_store = Some(PathBuf::from("fewshot.json"));
    c
}

fn check(case: &InputCase, t: Target, si: &SimulatedInput) -> Result<(), String> {
    let mut inputs = BTreeMap::new();
    inputs.insert(case.id.clone(), si.clone());
    let tm = Tm::new(TMConfig::new("probe", simulated(inputs, BTreeMap::new()))).map_err(|e| e.to_string())?;
    let samples = tm.sample_tm(case).map_err(|e| e.to_string())?;
    let r = analyze_input(case, &samples, OracleKind::default());
    let v = r.verdict.as_ref().ok_or_else(|| format!("no verdict: {:?}", r.status))?;
    let (a, c) = t.cell.expected();
    if (v.alignment, v.concentration) != (a, c) {
        return Err(format!("got {:?}/{:?}, counts {:?} {:?}", v.alignment, v.concentration, counts(&r), r.classes.iter().map(|c| c.representative.clone()).collect::<Vec<_>>()));
    }
    if t.cell == Cell::Twenty && r.classes.len() != 20 {
        return Err(format!("{} classes", r.classes.len()));
    }
    let got = r.mistake.as_ref().map(|m| m.primary);
    let want = t.mistake.map(|(l, _)| l);
    if got != want {
        return Err(format!("mistake {got:?}, wanted {want:?}"));
    }
    Ok(())
}

fn counts(r: &tmprob::campaign::InputResult) -> Vec<usize> {
    r.classes.iter().map(|c| c.count).collect()
}

fn search(case: &InputCase, g: &GroundtruthRecord, t: Target) -> Result<SimulatedInput, String> {
    if t.cell == Cell::Twenty {
        let si = modify_2d_twenty();
        check(case, t, &si)?;
        return Ok(si);
    }
    let v = variants(g);
    let (first, retry) = base_weights(&v, t);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut last = String::new();
    for attempt in 0..400 {
        let amount = if attempt == 0 { 0.0 } else { 0.6 };
        let mut attempts = vec![jitter(&first, &mut rng, amount)];
        if let Some(r) = &retry {
            attempts.push(jitter(r, &mut rng, amount));
        }
        let si = SimulatedInput {
            mode: SimulatedMode::Sample,
            attempts,
        };
        match check(case, t, &si) {
            Ok(()) => return Ok(si),
            Err(e) => last = e,
        }
    }
    Err(format!("{}: no weights found ({last})", case.id))
}

/// Heuristic answers for the sentence classifier.
fn label(sentence: &str) -> &'static str {
    let s = sentence.to_lowercase();
    let first = s.split_whitespace().next().unwrap_or("");
    if ["requires", "assumes"].contains(&first) || s.contains(" must ") {
        "pre-condition"
    } else if ["returns", "ensures"].contains(&first) {
        "post-condition"
    } else {
        "none"
    }
}

fn fewshot() -> Vec<FewShotEntry> {
    let e = |d: &str, s: &str, p: &str| FewShotEntry {
        docstring: d.into(),
        signature: s.into(),
        spec: p.into(),
    };
    vec![
        e("Computes the sum of two integers. Returns r equal to x plus y.", "method Add(x: int, y: int) returns (r: int)", "ensures r == x + y;"),
        e("Negates an integer. Returns r equal to -x.", "method Negate(x: int) returns (r: int)", "ensures r == -x;"),
        e("Counts down to zero. Requires n to be non-negative. Returns r equal to zero.", "method CountDown(n: int) returns (r: int)", "requires n >= 0;\nensures r == 0;"),
        e("Checks whether x is positive. Returns r true exactly when x is greater than zero.", "method IsPositive(x: int) returns (r: bool)", "ensures r <==> x > 0;"),
        e("Returns the element of a at position i. Requires i to be a valid index of a.", "method Get(a: seq<int>, i: int) returns (x: int)", "requires 0 <= i < |a|;\nensures x == a[i];"),
        e("Checks whether a sequence is empty. Returns r true exactly when a has no elements.", "method IsEmpty(a: seq<int>) returns (r: bool)", "ensures r <==> |a| == 0;"),
        e("Computes the length of a sequence. Returns n equal to the number of elements of a.", "method Length(a: seq<int>) returns (n: int)", "ensures n == |a|;"),
        e("Checks whether every element of a is positive. Returns r true exactly when all elements exceed zero.", "method AllPositive(a: seq<int>) returns (r: bool)", "ensures r <==> (forall j :: 0 <= j < |a| ==> a[j] > 0);"),
    ]
}

fn write_json(path: &Path, value: &impl serde::Serialize) {
    let text = serde_json::to_string_pretty(value).expect("serializes") + "\n";
    std::fs::write(path, text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    println!("wrote {}", path.display());
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let dataset_path = dir.join("dataset.json");
    let records: Vec<CaseRecord> =
        serde_json::from_str(&std::fs::read_to_string(&dataset_path).expect("dataset")).expect("dataset json");
    let dataset = load_dataset(&dataset_path).unwrap_or_else(|e| panic!("{e}"));

    let found: Vec<Result<(String, SimulatedInput, SimulatedInput), String>> = dataset
        .cases
        .par_iter()
        .zip(records.par_iter())
        .map(|(case, rec)| {
            let g = rec.groundtruth.as_ref().expect("groundtruth");
            let (tb, ts) = targets(&case.id);
            let base = search(case, g, tb)?;
            let structured = if tb.cell == ts.cell && tb.mistake.map(|m| m.1) == ts.mistake.map(|m| m.1) {
                base.clone()
            } else {
                search(case, g, ts)?
            };
            Ok((case.id.clone(), base, structured))
        })
        .collect();

    let mut base_inputs = BTreeMap::new();
    let mut structured_inputs = BTreeMap::new();
    let mut failed = false;
    for f in found {
        match f {
            Ok((id, b, s)) => {
                base_inputs.insert(id.clone(), b);
                structured_inputs.insert(id, s);
            }
            Err(e) => {
                eprintln!("{e}");
                failed = true;
            }
        }
    }
    if failed {
        std::process::exit(1);
    }

    let labels: BTreeMap<String, String> = dataset
        .cases
        .iter()
        .flat_map(|c| split_sentences(&c.docstring))
        .map(|s| {
            let l = label(&s).to_string();
            (s, l)
        })
        .collect();

    write_json(&dir.join("fewshot.json"), &fewshot());
    let base = tm_config("baseline", simulated(base_inputs, BTreeMap::new()), Preprocessing::None);
    let structured = tm_config(
        "structured-docstring",
        simulated(structured_inputs, labels),
        Preprocessing::StructuredDocstring,
    );
    write_json(&dir.join("baseline_tm.json"), &base);
    write_json(&dir.join("structured_tm.json"), &structured);

    for name in ["baseline_tm.json", "structured_tm.json"] {
        let cfg = TMConfig::load(&dir.join(name)).expect("reload");
        let tm = Tm::new(cfg).expect("tm");
        let report = run_campaign(&tm, &dataset, OracleKind::default());
        let g = &report.grid;
        println!(
            "{name}: AC {} ANC {} | MCG {} {} | CNG {} {}",
            g.aligned.concentrated,
            g.aligned.not_concentrated,
            g.misaligned_correct_generated.concentrated,
            g.misaligned_correct_generated.not_concentrated,
            g.correct_not_generated.concentrated,
            g.correct_not_generated.not_concentrated
        );
    }
}
