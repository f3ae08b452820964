use std::path::{Path, PathBuf};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = tmprob::cli::run(std::iter::once("tmprob").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

const INC: &str = "method Inc(x: int) returns (r: int)";

#[test]
fn check_accepts_and_rejects() {
    let (code, out, _) = run(&["check", "--signature", INC, "ensures r == x + 1;"]);
    assert_eq!(code, 0, "{out}");
    let (code, out, _) = run(&["check", "--signature", INC, "ensures r == ;"]);
    assert_eq!(code, 1);
    assert!(out.contains("1:14: syntax error"), "{out}");
}

#[test]
fn bad_signature_is_usage_error() {
    let (code, _, _) = run(&["check", "--signature", "method (", "ensures true;"]);
    assert_eq!(code, 2);
}

#[test]
fn equiv_reports_counterexample_and_smtlib() {
    let (code, out, _) = run(&["equiv", "--signature", INC, "ensures r == x + 1;", "ensures r - 1 == x;"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.starts_with("equivalent"), "{out}");
    let (code, out, _) = run(&["equiv", "--signature", INC, "ensures r == x + 1;", "ensures r > x;"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("not equivalent: postconditions differ at"), "{out}");
    let (code, out, _) = run(&["equiv", "--signature", INC, "--smtlib", "ensures r == x + 1;", "ensures r > x;"]);
    assert_eq!(code, 0);
    assert!(out.contains("(check-sat)"), "{out}");
}

#[test]
fn diagnose_reads_files() {
    let dir = tempfile::tempdir().unwrap();
    let gt = dir.path().join("gt.txt");
    let cand = dir.path().join("cand.txt");
    std::fs::write(&gt, "requires x >= 0;\nensures r == x + 1;").unwrap();
    std::fs::write(&cand, "ensures r == x + 1;").unwrap();
    let (code, out, _) = run(&[
        "diagnose",
        "--signature",
        INC,
        "--groundtruth",
        gt.to_str().unwrap(),
        "--candidate",
        cand.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("WeakPre"), "{out}");
}

#[test]
fn missing_inputs_are_usage_errors() {
    let fx = fixtures();
    let (code, _, err) = run(&[
        "run",
        "--dataset",
        "/nonexistent/ds.json",
        "--tm-config",
        fx.join("baseline_tm.json").to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "{err}");
    let (code, _, _) = run(&["run", "--dataset", fx.join("dataset.json").to_str().unwrap(), "--tm-config", "/nope.json"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn compare_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures();
    let paths: Vec<PathBuf> = ["baseline_tm.json", "structured_tm.json"]
        .iter()
        .map(|cfg| {
            let out = dir.path().join(cfg.replace("_tm", "_report"));
            let (code, _, err) = run(&[
                "run",
                "--dataset",
                fx.join("dataset.json").to_str().unwrap(),
                "--tm-config",
                fx.join(cfg).to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ]);
            assert_eq!(code, 0, "{err}");
            out
        })
        .collect();
    let (b, n) = (paths[0].to_str().unwrap(), paths[1].to_str().unwrap());
    assert_eq!(run(&["compare", b, n, "--fail-on-regression"]).0, 0);
    let (code, out, _) = run(&["compare", n, b, "--fail-on-regression"]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("improves: false"));
    let (code, out, _) = run(&["compare", b, n, "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["cm_new"].as_array().unwrap().len(), 2);

    let mut other: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&paths[1]).unwrap()).unwrap();
    other["dataset_id"] = "elsewhere@000000000000".into();
    let moved = dir.path().join("moved.json");
    std::fs::write(&moved, other.to_string()).unwrap();
    assert_eq!(run(&["compare", b, moved.to_str().unwrap()]).0, 1);
}

#[test]
fn run_rejects_zero_jobs() {
    let fx = fixtures();
    let (code, _, _) = run(&[
        "run",
        "--dataset",
        fx.join("dataset.json").to_str().unwrap(),
        "--tm-config",
        fx.join("baseline_tm.json").to_str().unwrap(),
        "--jobs",
        "0",
    ]);
    assert_eq!(code, 2);
}

#[test]
fn text_oracles_run_end_to_end() {
    let fx = fixtures();
    for oracle in ["exact", "normalized"] {
        let (code, out, err) = run(&[
            "run",
            "--dataset",
            fx.join("dataset.json").to_str().unwrap(),
            "--tm-config",
            fx.join("baseline_tm.json").to_str().unwrap(),
            "--oracle",
            oracle,
            "--samples",
            "6",
        ]);
        assert_eq!(code, 0, "{err}");
        assert!(out.contains("Aligned"));
    }
}
