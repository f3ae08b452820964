//! Bounded exhaustive checking over finite integer and sequence domains.
//!
//! The answers are exact over the enumerated domain and only falsifying
//! beyond it: `true` means "no counterexample within bounds".
//!
//! Error convention for comparing two formulas on one environment: if
//! both sides fail to evaluate the environment is skipped; if exactly one
//! side fails the formulas disagree there.

use super::ast::{Expr, Param, Signature, SpecPair, Type};
use super::error::SpecError;
use super::eval::{compile, Compiled, Env, EvalError, Layout, Machine, Slot, Value};
use super::typecheck::{check_formula, check_spec, Clause};
use serde::{Deserialize, Serialize};

/// Finite stand-in for the unbounded integer domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EvaluationBounds {
    /// Ints range over `[-int_bound, int_bound]`; so do sequence elements.
    pub int_bound: u32,
    /// Sequences have lengths `0..=max_seq_len`.
    pub max_seq_len: u32,
    /// Range of quantified variables. Defaults to
    /// `[-int_bound - 1, int_bound + max_seq_len]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantifier_range: Option<(i64, i64)>,
}

impl Default for EvaluationBounds {
    fn default() -> Self {
        Self::new(2, 2)
    }
}

/// Upper limit on environments enumerated by one query.
pub const MAX_ENVIRONMENTS: u64 = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoundedError {
    #[error("ill-typed operand: {0}")]
    IllTyped(#[from] SpecError),
    #[error("evaluation setup failed: {0}")]
    Setup(#[from] EvalError),
    #[error("{count} environments exceed the enumeration limit of {MAX_ENVIRONMENTS}; lower the bounds")]
    TooManyEnvironments { count: u64 },
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
}

impl EvaluationBounds {
    pub fn new(int_bound: u32, max_seq_len: u32) -> Self {
        Self {
            int_bound,
            max_seq_len,
            quantifier_range: None,
        }
    }

    pub fn with_quantifier_range(mut self, lo: i64, hi: i64) -> Result<Self, BoundedError> {
        self.quantifier_range = Some((lo, hi));
        self.validate()?;
        Ok(self)
    }

    pub fn quantifier_range(&self) -> (i64, i64) {
        self.quantifier_range.unwrap_or((
            -(self.int_bound as i64) - 1,
            self.int_bound as i64 + self.max_seq_len as i64,
        ))
    }

    /// The quantifier range must cover every valid index `0..=max_seq_len`.
    pub fn validate(&self) -> Result<(), BoundedError> {
        let (lo, hi) = self.quantifier_range();
        if lo > 0 || hi < self.max_seq_len as i64 {
            return Err(BoundedError::InvalidBounds(format!(
                "quantifier range [{lo}, {hi}] does not cover [0, {}]",
                self.max_seq_len
            )));
        }
        Ok(())
    }

    /// Values a variable of type `ty` takes, in enumeration order.
    pub fn domain(&self, ty: Type) -> Vec<Value> {
        let b = self.int_bound as i64;
        match ty {
            Type::Int => (-b..=b).map(Value::Int).collect(),
            Type::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Type::IntSeq => {
                let mut out = vec![Value::Seq(Vec::new())];
                let mut layer: Vec<Vec<i64>> = vec![Vec::new()];
                for _ in 0..self.max_seq_len {
                    layer = layer
                        .iter()
                        .flat_map(|prefix| {
                            (-b..=b).map(move |v| {
                                let mut s = prefix.clone();
                                s.push(v);
                                s
                            })
                        })
                        .collect();
                    out.extend(layer.iter().cloned().map(Value::Seq));
                }
                out
            }
        }
    }

    fn domain_size(&self, ty: Type) -> u64 {
        let width = 2 * self.int_bound as u64 + 1;
        match ty {
            Type::Int => width,
            Type::Bool => 2,
            Type::IntSeq => (0..=self.max_seq_len).fold(0u64, |acc, k| {
                acc.saturating_add(width.saturating_pow(k))
            }),
        }
    }
}

impl std::fmt::Display for EvaluationBounds {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (lo, hi) = self.quantifier_range();
        write!(
            f,
            "bounded: ints in [-{b}, {b}], seq lengths 0..={l}, quantifiers over [{lo}, {hi}]",
            b = self.int_bound,
            l = self.max_seq_len
        )
    }
}

/// Three-valued evaluation result of a formula on one environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Outcome {
    False = 0,
    True = 1,
    Error = 2,
}

enum Reg {
    Scalar(i64),
    Seq(Vec<i64>),
}

/// Cartesian product of variable domains, addressed by a mixed-radix index
/// (first variable most significant).
pub(crate) struct Space {
    vars: Vec<(String, Slot)>,
    domains: Vec<Vec<Reg>>,
    values: Vec<Vec<Value>>,
    count: u64,
}

impl Space {
    pub fn new(vars: &[(Param, Slot)], bounds: &EvaluationBounds) -> Result<Self, BoundedError> {
        let mut count = 1u64;
        for (p, _) in vars {
            count = count.saturating_mul(bounds.domain_size(p.ty));
        }
        if count > MAX_ENVIRONMENTS {
            return Err(BoundedError::TooManyEnvironments { count });
        }
        let values: Vec<Vec<Value>> = vars.iter().map(|(p, _)| bounds.domain(p.ty)).collect();
        let domains = values
            .iter()
            .map(|vals| {
                vals.iter()
                    .map(|v| match v {
                        Value::Int(i) => Reg::Scalar(*i),
                        Value::Bool(b) => Reg::Scalar(*b as i64),
                        Value::Seq(s) => Reg::Seq(s.clone()),
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            vars: vars.iter().map(|(p, s)| (p.name.clone(), *s)).collect(),
            domains,
            values,
            count,
        })
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    fn digits(&self, mut idx: u64, out: &mut Vec<usize>) {
        out.clear();
        out.resize(self.domains.len(), 0);
        for (k, dom) in self.domains.iter().enumerate().rev() {
            let n = dom.len() as u64;
            out[k] = (idx % n) as usize;
            idx /= n;
        }
    }

    /// Writes assignment `idx` into the register files.
    pub fn fill<'s>(&'s self, idx: u64, digits: &mut Vec<usize>, scalars: &mut [i64], seqs: &mut [&'s [i64]]) {
        self.digits(idx, digits);
        for (k, (_, slot)) in self.vars.iter().enumerate() {
            match (&self.domains[k][digits[k]], slot) {
                (Reg::Scalar(v), Slot::Scalar(i)) => scalars[*i] = *v,
                (Reg::Seq(s), Slot::Seq(i)) => seqs[*i] = s,
                _ => unreachable!("domain matches slot kind"),
            }
        }
    }

    pub fn env(&self, idx: u64, into: &mut Env) {
        let mut digits = Vec::new();
        self.digits(idx, &mut digits);
        for (k, (name, _)) in self.vars.iter().enumerate() {
            into.insert(name.clone(), self.values[k][digits[k]].clone());
        }
    }
}

/// Compiled conjunctions over one shared register layout.
pub(crate) struct Program {
    pub layout: Layout,
    pub scalars: usize,
}

impl Program {
    pub fn new(layout: Layout) -> Self {
        let scalars = layout.scalars;
        Self { layout, scalars }
    }

    pub fn conj(&mut self, fs: &[Expr]) -> Result<Vec<Compiled>, BoundedError> {
        let out = fs
            .iter()
            .map(|f| compile(f, &self.layout))
            .collect::<Result<Vec<_>, _>>()?;
        for c in &out {
            self.scalars = self.scalars.max(c.scalars);
        }
        Ok(out)
    }
}

/// Short-circuit conjunction, left to right. Empty is `True`.
pub(crate) fn eval_conj(m: &mut Machine<'_>, fs: &[Compiled]) -> Outcome {
    for f in fs {
        match m.truth(&f.root) {
            Err(_) => return Outcome::Error,
            Ok(false) => return Outcome::False,
            Ok(true) => {}
        }
    }
    Outcome::True
}

fn vars_of(sig: &Signature, formulas: &[&[Expr]]) -> Vec<Param> {
    let mut names: Vec<String> = Vec::new();
    for group in formulas {
        for f in group.iter() {
            for v in f.free_vars() {
                if !names.contains(&v) {
                    names.push(v);
                }
            }
        }
    }
    sig.variables().filter(|p| names.contains(&p.name)).cloned().collect()
}

/// Searches for an environment where `hypothesis` holds but
/// `lhs ⇒ rhs` fails, each side being a conjunction. Only variables that
/// occur in some formula are enumerated.
pub fn implication_counterexample(
    hypothesis: &[Expr],
    lhs: &[Expr],
    rhs: &[Expr],
    sig: &Signature,
    bounds: &EvaluationBounds,
) -> Result<Option<Env>, BoundedError> {
    bounds.validate()?;
    for f in hypothesis.iter().chain(lhs).chain(rhs) {
        check_formula(f, sig, Clause::Ensures)?;
    }
    let params = vars_of(sig, &[hypothesis, lhs, rhs]);
    let mut layout = Layout::default();
    let slots: Vec<(Param, Slot)> = params.iter().map(|p| (p.clone(), layout.push(&p.name, p.ty))).collect();
    let space = Space::new(&slots, bounds)?;
    let mut prog = Program::new(layout);
    let hyp = prog.conj(hypothesis)?;
    let left = prog.conj(lhs)?;
    let right = prog.conj(rhs)?;

    let mut digits = Vec::new();
    let mut scalars = vec![0; prog.scalars];
    let mut seqs: Vec<&[i64]> = vec![&[]; prog.layout.seqs];
    for idx in 0..space.count() {
        space.fill(idx, &mut digits, &mut scalars, &mut seqs);
        let mut m = Machine::new(std::mem::take(&mut scalars), &seqs, bounds);
        let verdict = if eval_conj(&mut m, &hyp) != Outcome::True {
            true
        } else {
            match (eval_conj(&mut m, &left), eval_conj(&mut m, &right)) {
                (Outcome::Error, Outcome::Error) => true,
                (Outcome::Error, _) | (_, Outcome::Error) => false,
                (Outcome::True, Outcome::False) => false,
                _ => true,
            }
        };
        scalars = m.scalars;
        if !verdict {
            let mut env = Env::new();
            space.env(idx, &mut env);
            return Ok(Some(env));
        }
    }
    Ok(None)
}

/// `f ⇒ g` on every enumerated environment (see module docs for errors).
pub fn implies_bounded(f: &Expr, g: &Expr, sig: &Signature, bounds: &EvaluationBounds) -> Result<bool, BoundedError> {
    Ok(implication_counterexample(&[], std::slice::from_ref(f), std::slice::from_ref(g), sig, bounds)?.is_none())
}

/// Where two specs were found to differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Disagreement {
    /// Preconditions disagree on this parameter assignment.
    Pre(Env),
    /// Both preconditions hold but postconditions disagree.
    Post(Env),
}

impl Disagreement {
    pub fn env(&self) -> &Env {
        match self {
            Disagreement::Pre(e) | Disagreement::Post(e) => e,
        }
    }
}

struct SpecProgram {
    params: Space,
    returns: Space,
    prog: Program,
}

fn spec_program(sig: &Signature, bounds: &EvaluationBounds) -> Result<SpecProgram, BoundedError> {
    bounds.validate()?;
    let mut layout = Layout::default();
    let p: Vec<(Param, Slot)> = sig.params.iter().map(|p| (p.clone(), layout.push(&p.name, p.ty))).collect();
    let r: Vec<(Param, Slot)> = sig.returns.iter().map(|p| (p.clone(), layout.push(&p.name, p.ty))).collect();
    let params = Space::new(&p, bounds)?;
    let returns = Space::new(&r, bounds)?;
    let total = params.count().saturating_mul(returns.count());
    if total > MAX_ENVIRONMENTS {
        return Err(BoundedError::TooManyEnvironments { count: total });
    }
    Ok(SpecProgram {
        params,
        returns,
        prog: Program::new(layout),
    })
}

/// Returns the first environment (in enumeration order) on which the two
/// specs disagree: preconditions compared on every parameter assignment,
/// postconditions on every full assignment satisfying the first
/// precondition.
pub fn equivalence_counterexample(
    s1: &SpecPair,
    s2: &SpecPair,
    sig: &Signature,
    bounds: &EvaluationBounds,
) -> Result<Option<Disagreement>, BoundedError> {
    check_spec(s1, sig)?;
    check_spec(s2, sig)?;
    let mut sp = spec_program(sig, bounds)?;
    let pre1 = sp.prog.conj(&s1.preconditions)?;
    let pre2 = sp.prog.conj(&s2.preconditions)?;
    let post1 = sp.prog.conj(&s1.postconditions)?;
    let post2 = sp.prog.conj(&s2.postconditions)?;

    let mut digits = Vec::new();
    let mut scalars = vec![0; sp.prog.scalars];
    let mut seqs: Vec<&[i64]> = vec![&[]; sp.prog.layout.seqs];
    for pi in 0..sp.params.count() {
        sp.params.fill(pi, &mut digits, &mut scalars, &mut seqs);
        let mut m = Machine::new(std::mem::take(&mut scalars), &seqs, bounds);
        let (a, b) = (eval_conj(&mut m, &pre1), eval_conj(&mut m, &pre2));
        scalars = m.scalars;
        if a != b {
            let mut env = Env::new();
            sp.params.env(pi, &mut env);
            return Ok(Some(Disagreement::Pre(env)));
        }
        if a != Outcome::True {
            continue;
        }
        for ri in 0..sp.returns.count() {
            sp.returns.fill(ri, &mut digits, &mut scalars, &mut seqs);
            let mut m = Machine::new(std::mem::take(&mut scalars), &seqs, bounds);
            let (a, b) = (eval_conj(&mut m, &post1), eval_conj(&mut m, &post2));
            scalars = m.scalars;
            if a != b {
                let mut env = Env::new();
                sp.params.env(pi, &mut env);
                sp.returns.env(ri, &mut env);
                return Ok(Some(Disagreement::Post(env)));
            }
        }
    }
    Ok(None)
}

/// Bounded equivalence of two specs under one signature.
pub fn equivalent_bounded(
    s1: &SpecPair,
    s2: &SpecPair,
    sig: &Signature,
    bounds: &EvaluationBounds,
) -> Result<bool, BoundedError> {
    Ok(equivalence_counterexample(s1, s2, sig, bounds)?.is_none())
}

/// Truth tables of a spec over the enumerated domain: precondition outcome
/// per parameter assignment, then postcondition outcome per full
/// assignment whose precondition is true. Two specs are bounded-equivalent
/// exactly when their fingerprints are equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpecFingerprint {
    pre: Vec<Outcome>,
    post: Vec<Outcome>,
}

pub fn fingerprint(spec: &SpecPair, sig: &Signature, bounds: &EvaluationBounds) -> Result<SpecFingerprint, BoundedError> {
    check_spec(spec, sig)?;
    let mut sp = spec_program(sig, bounds)?;
    let pre = sp.prog.conj(&spec.preconditions)?;
    let post = sp.prog.conj(&spec.postconditions)?;
    let mut out = SpecFingerprint {
        pre: Vec::with_capacity(sp.params.count() as usize),
        post: Vec::new(),
    };
    let mut digits = Vec::new();
    let mut scalars = vec![0; sp.prog.scalars];
    let mut seqs: Vec<&[i64]> = vec![&[]; sp.prog.layout.seqs];
    for pi in 0..sp.params.count() {
        sp.params.fill(pi, &mut digits, &mut scalars, &mut seqs);
        let mut m = Machine::new(std::mem::take(&mut scalars), &seqs, bounds);
        let a = eval_conj(&mut m, &pre);
        scalars = m.scalars;
        out.pre.push(a);
        if a != Outcome::True {
            continue;
        }
        for ri in 0..sp.returns.count() {
            sp.returns.fill(ri, &mut digits, &mut scalars, &mut seqs);
            let mut m = Machine::new(std::mem::take(&mut scalars), &seqs, bounds);
            out.post.push(eval_conj(&mut m, &post));
            scalars = m.scalars;
        }
    }
    Ok(out)
}
