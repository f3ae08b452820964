//! The `tmprob` command line. Exit codes: 0 success (including negative
//! analysis verdicts), 1 domain errors, 2 usage errors.

use crate::campaign::{self, compare, load_dataset, render_grid, render_mistakes, CampaignReport, DatasetError, Format};
use crate::distribution::Alignment;
use crate::oracle::OracleKind;
use crate::spec_lang::{
    diagnose, equivalence_counterexample, format_env, parse_signature, parse_spec, to_smtlib, Disagreement,
    EvaluationBounds, Signature,
};
use crate::tm::{TMConfig, Tm};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "tmprob", version, about = "Distribution-level analysis of LLM-backed components")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleArg {
    Exact,
    Normalized,
    Spec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Text,
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// Integers range over [-B, B].
    #[arg(long = "int-bound", default_value_t = 2)]
    int_bound: u32,
    /// Sequences have lengths 0..=L.
    #[arg(long = "len-bound", default_value_t = 2)]
    len_bound: u32,
}

impl BoundsArgs {
    fn bounds(&self) -> EvaluationBounds {
        EvaluationBounds::new(self.int_bound, self.len_bound)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a model over a dataset and write a campaign report.
    Run {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long = "tm-config")]
        tm_config: PathBuf,
        /// Samples per input; defaults to the config value (30 unless set).
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = OracleArg::Spec)]
        oracle: OracleArg,
        #[command(flatten)]
        bounds: BoundsArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; defaults to the number of CPUs.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
    },
    /// Print the tables of an existing report.
    Analyze {
        report: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
    },
    /// Decide whether the second report improves on the first.
    Compare {
        base: PathBuf,
        new: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
        /// Exit 1 when the new report does not improve on the base.
        #[arg(long)]
        fail_on_regression: bool,
    },
    /// Classify how a candidate spec deviates from a reference spec.
    Diagnose {
        #[arg(long)]
        signature: String,
        /// File holding the reference spec.
        #[arg(long)]
        groundtruth: PathBuf,
        /// File holding the candidate spec.
        #[arg(long)]
        candidate: PathBuf,
        #[command(flatten)]
        bounds: BoundsArgs,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
    },
    /// Bounded equivalence of two specs. Each SPEC is a file path, or
    /// inline spec text when no such file exists.
    Equiv {
        #[arg(long)]
        signature: String,
        first: String,
        second: String,
        #[command(flatten)]
        bounds: BoundsArgs,
        /// Also print an SMT-LIB 2 script for an external solver.
        #[arg(long)]
        smtlib: bool,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
    },
    /// Parse and typecheck a spec (file path or inline text).
    Check {
        #[arg(long)]
        signature: String,
        spec: String,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
    },
}

/// A failure carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

fn domain(message: impl ToString) -> Failure {
    Failure {
        code: 1,
        message: message.to_string(),
    }
}

fn usage(message: impl ToString) -> Failure {
    Failure {
        code: 2,
        message: message.to_string(),
    }
}

type Outcome = Result<i32, Failure>;

fn spec_source(arg: &str) -> Result<String, Failure> {
    let p = Path::new(arg);
    if p.is_file() {
        std::fs::read_to_string(p).map_err(|e| domain(format!("{arg}: {e}")))
    } else {
        Ok(arg.to_string())
    }
}

fn read_file(p: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(p).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            usage(format!("{}: no such file", p.display()))
        } else {
            domain(format!("{}: {e}", p.display()))
        }
    })
}

fn signature(text: &str) -> Result<Signature, Failure> {
    parse_signature(text).map_err(|e| usage(format!("--signature: {e}")))
}

fn load_report(p: &Path) -> Result<CampaignReport, Failure> {
    CampaignReport::from_json(&read_file(p)?).map_err(|e| domain(format!("{}: not a campaign report: {e}", p.display())))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| domain(format!("writing output: {e}")))
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    out: &mut dyn Write,
    dataset: &Path,
    tm_config: &Path,
    samples: Option<usize>,
    seed: Option<u64>,
    oracle: OracleArg,
    bounds: EvaluationBounds,
    out_path: Option<&Path>,
    jobs: Option<usize>,
    format: Format,
) -> Outcome {
    if !dataset.exists() {
        return Err(usage(format!("{}: no such dataset", dataset.display())));
    }
    if !tm_config.exists() {
        return Err(usage(format!("{}: no such TM config", tm_config.display())));
    }
    let ds = load_dataset(dataset).map_err(|e| match e {
        DatasetError::Io { .. } => usage(e),
        other => domain(other),
    })?;
    let mut cfg = TMConfig::load(tm_config).map_err(domain)?;
    if let Some(n) = samples {
        cfg.sampling.n_samples = n;
    }
    if let Some(s) = seed {
        cfg.sampling.seed = s;
    }
    let kind = match oracle {
        OracleArg::Exact => OracleKind::ExactText,
        OracleArg::Normalized => OracleKind::NormalizedText,
        OracleArg::Spec => {
            bounds.validate().map_err(usage)?;
            OracleKind::BoundedSpecEquivalence { bounds }
        }
    };
    let tm = Tm::new(cfg).map_err(domain)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(domain)?;
    let report = pool.install(|| campaign::run_campaign(&tm, &ds, kind));
    let json = report.to_json();
    if let Some(p) = out_path {
        std::fs::write(p, &json).map_err(|e| domain(format!("{}: {e}", p.display())))?;
    }
    match format {
        Format::Json => emit(out, &json)?,
        f => {
            emit(out, &render_grid(&report.grid, f))?;
            if !report.incomplete_inputs.is_empty() {
                emit(out, &format!("incomplete inputs: {}\n", report.incomplete_inputs.join(", ")))?;
            }
        }
    }
    Ok(0)
}

fn cmd_analyze(out: &mut dyn Write, report: &Path, format: Format) -> Outcome {
    let r = load_report(report)?;
    let misaligned: Vec<(String, String)> = r
        .per_input
        .iter()
        .filter(|(_, i)| i.verdict.map(|v| v.alignment != Alignment::Aligned).unwrap_or(false))
        .map(|(id, i)| (id.clone(), i.mistake.as_ref().map(|m| m.primary.to_string()).unwrap_or_default()))
        .collect();
    match format {
        Format::Json => {
            let v = serde_json::json!({
                "grid": r.grid,
                "mistake_breakdown": r.mistake_breakdown,
                "misaligned": misaligned.iter().cloned().collect::<std::collections::BTreeMap<_, _>>(),
                "incomplete_inputs": r.incomplete_inputs,
            });
            emit(out, &(serde_json::to_string_pretty(&v).expect("json") + "\n"))?;
        }
        f => {
            emit(out, &format!("tm: {}\ndataset: {}\noracle: {}\n\n", r.tm_id, r.dataset_id, r.oracle))?;
            emit(out, &render_grid(&r.grid, f))?;
            emit(out, "\n")?;
            emit(out, &render_mistakes(&r.mistake_breakdown, f))?;
            if f == Format::Text && !misaligned.is_empty() {
                emit(out, "\nmisaligned inputs:\n")?;
                for (id, label) in &misaligned {
                    emit(out, &format!("  {id}: {label}\n"))?;
                }
            }
        }
    }
    Ok(0)
}

fn cmd_compare(out: &mut dyn Write, base: &Path, new: &Path, format: Format, fail: bool) -> Outcome {
    let (b, n) = (load_report(base)?, load_report(new)?);
    let c = compare(&b, &n).map_err(domain)?;
    match format {
        Format::Json => emit(out, &(serde_json::to_string_pretty(&c).expect("json") + "\n"))?,
        _ => emit(out, &c.render_text())?,
    }
    Ok(if fail && !c.improves { 1 } else { 0 })
}

fn cmd_diagnose(
    out: &mut dyn Write,
    sig: &str,
    groundtruth: &Path,
    candidate: &Path,
    bounds: EvaluationBounds,
    format: Format,
) -> Outcome {
    let sig = signature(sig)?;
    bounds.validate().map_err(usage)?;
    let gt = parse_spec(&read_file(groundtruth)?, &sig).map_err(|e| domain(format!("groundtruth: {e}")))?;
    let cand = parse_spec(&read_file(candidate)?, &sig);
    let d = diagnose(cand.as_ref(), &gt, &sig, &bounds).map_err(domain)?;
    match format {
        Format::Json => emit(out, &(serde_json::to_string_pretty(&d).expect("json") + "\n"))?,
        _ => {
            emit(out, &format!("{}\n", d.primary))?;
            if d.labels.len() > 1 {
                let all: Vec<String> = d.labels.iter().map(|l| l.to_string()).collect();
                emit(out, &format!("labels: {}\n", all.join(", ")))?;
            }
            if let Err(e) = &cand {
                emit(out, &format!("candidate: {e}\n"))?;
            }
        }
    }
    Ok(0)
}

fn cmd_equiv(
    out: &mut dyn Write,
    sig: &str,
    first: &str,
    second: &str,
    bounds: EvaluationBounds,
    smtlib: bool,
    format: Format,
) -> Outcome {
    let sig = signature(sig)?;
    bounds.validate().map_err(usage)?;
    let a = parse_spec(&spec_source(first)?, &sig).map_err(|e| domain(format!("first spec: {e}")))?;
    let b = parse_spec(&spec_source(second)?, &sig).map_err(|e| domain(format!("second spec: {e}")))?;
    let cex = equivalence_counterexample(&a, &b, &sig, &bounds).map_err(domain)?;
    match format {
        Format::Json => {
            let (part, env) = match &cex {
                None => (None, None),
                Some(Disagreement::Pre(e)) => (Some("pre"), Some(e)),
                Some(Disagreement::Post(e)) => (Some("post"), Some(e)),
            };
            let mut v = serde_json::json!({
                "equivalent": cex.is_none(),
                "bounded": bounds.to_string(),
                "disagreement": part,
                "counterexample": env,
            });
            if smtlib {
                v["smtlib"] = to_smtlib(&a, &b, &sig).into();
            }
            emit(out, &(serde_json::to_string_pretty(&v).expect("json") + "\n"))?;
        }
        _ => {
            match &cex {
                None => emit(out, &format!("equivalent ({bounds})\n"))?,
                Some(Disagreement::Pre(e)) => {
                    emit(out, &format!("not equivalent: preconditions differ at {}\n", format_env(e)))?
                }
                Some(Disagreement::Post(e)) => {
                    emit(out, &format!("not equivalent: postconditions differ at {}\n", format_env(e)))?
                }
            }
            if smtlib {
                emit(out, &to_smtlib(&a, &b, &sig))?;
            }
        }
    }
    Ok(0)
}

fn cmd_check(out: &mut dyn Write, sig: &str, spec: &str, format: Format) -> Outcome {
    let sig = signature(sig)?;
    let res = parse_spec(&spec_source(spec)?, &sig);
    match (format, &res) {
        (Format::Json, Ok(s)) => emit(
            out,
            &(serde_json::to_string_pretty(&serde_json::json!({
                "ok": true,
                "preconditions": s.preconditions.len(),
                "postconditions": s.postconditions.len(),
            }))
            .expect("json")
                + "\n"),
        )?,
        (Format::Json, Err(e)) => emit(
            out,
            &(serde_json::to_string_pretty(&serde_json::json!({
                "ok": false,
                "line": e.line,
                "column": e.column,
                "category": e.category.to_string(),
                "message": e.message,
            }))
            .expect("json")
                + "\n"),
        )?,
        (_, Ok(s)) => emit(
            out,
            &format!(
                "ok: {} precondition(s), {} postcondition(s)\n",
                s.preconditions.len(),
                s.postconditions.len()
            ),
        )?,
        (_, Err(e)) => emit(out, &format!("{e}\n"))?,
    }
    Ok(if res.is_ok() { 0 } else { 1 })
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit code. Diagnostics go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Run {
            dataset,
            tm_config,
            samples,
            seed,
            oracle,
            bounds,
            out: out_path,
            jobs,
            format,
        } => cmd_run(
            out,
            &dataset,
            &tm_config,
            samples,
            seed,
            oracle,
            bounds.bounds(),
            out_path.as_deref(),
            jobs,
            format.into(),
        ),
        Command::Analyze { report, format } => cmd_analyze(out, &report, format.into()),
        Command::Compare {
            base,
            new,
            format,
            fail_on_regression,
        } => cmd_compare(out, &base, &new, format.into(), fail_on_regression),
        Command::Diagnose {
            signature,
            groundtruth,
            candidate,
            bounds,
            format,
        } => cmd_diagnose(out, &signature, &groundtruth, &candidate, bounds.bounds(), format.into()),
        Command::Equiv {
            signature,
            first,
            second,
            bounds,
            smtlib,
            format,
        } => cmd_equiv(out, &signature, &first, &second, bounds.bounds(), smtlib, format.into()),
        Command::Check { signature, spec, format } => cmd_check(out, &signature, &spec, format.into()),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
