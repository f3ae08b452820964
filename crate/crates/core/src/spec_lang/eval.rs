//! Ground semantics. Formulas are lowered to a slot-addressed form once
//! and then evaluated many times during bounded enumeration.
//!
//! Semantics are strict except that `&&`, `||` and `==>` decide on their
//! left operand before touching the right one. Division and modulus are
//! Euclidean (remainder is never negative). Quantifiers range over the
//! bounds' quantifier interval; an error in any instance is an error of
//! the whole quantifier.

use super::ast::{BinOp, Expr, ExprKind, Param, Quantifier, Signature, Span, Type, UnaryOp};
use super::bounded::EvaluationBounds;
use super::typecheck::{check_formula, Clause};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Seq(Vec<i64>),
}

impl Value {
    pub fn ty(&self) -> Type {
        match self {
            Value::Int(_) => Type::Int,
            Value::Bool(_) => Type::Bool,
            Value::Seq(_) => Type::IntSeq,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Seq(s) => {
                f.write_str("[")?;
                for (i, v) in s.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
        }
    }
}

/// Variable assignment, keyed by name.
pub type Env = BTreeMap<String, Value>;

pub fn format_env(env: &Env) -> String {
    env.iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EvalErrorKind {
    DivisionByZero,
    IndexOutOfRange { index: i64, len: usize },
    Overflow,
    UnboundVariable(String),
    IllTyped(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, thiserror::Error)]
#[error("{kind} at bytes {}..{}", span.start, span.end)]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub span: Span,
}

impl fmt::Display for EvalErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalErrorKind::DivisionByZero => f.write_str("division by zero"),
            EvalErrorKind::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for length {len}")
            }
            EvalErrorKind::Overflow => f.write_str("integer overflow"),
            EvalErrorKind::UnboundVariable(n) => write!(f, "variable `{n}` is not assigned"),
            EvalErrorKind::IllTyped(m) => write!(f, "ill-typed formula: {m}"),
        }
    }
}

/// Where a variable lives at runtime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Slot {
    Scalar(usize),
    Seq(usize),
}

#[derive(Debug, Clone)]
pub(crate) enum Node {
    Int(i64),
    Bool(bool),
    Scalar(usize),
    Seq(usize),
    Not(Box<Node>),
    Neg(Box<Node>, Span),
    Bin(BinOp, Box<Node>, Box<Node>, Span),
    Index(Box<Node>, Box<Node>, Span),
    Len(Box<Node>),
    Quant(Quantifier, usize, Box<Node>),
}

/// Name-to-slot layout shared by every formula evaluated over the same
/// enumeration. Ints and bools share the scalar file (bools as 0/1).
#[derive(Debug, Clone, Default)]
pub(crate) struct Layout {
    names: Vec<(String, Slot)>,
    pub scalars: usize,
    pub seqs: usize,
}

impl Layout {
    pub fn push(&mut self, name: &str, ty: Type) -> Slot {
        let slot = match ty {
            Type::IntSeq => {
                self.seqs += 1;
                Slot::Seq(self.seqs - 1)
            }
            _ => {
                self.scalars += 1;
                Slot::Scalar(self.scalars - 1)
            }
        };
        self.names.push((name.to_string(), slot));
        slot
    }

    pub fn from_params<'a>(params: impl IntoIterator<Item = &'a Param>) -> Self {
        let mut l = Layout::default();
        for p in params {
            l.push(&p.name, p.ty);
        }
        l
    }

    fn find(&self, name: &str) -> Option<Slot> {
        self.names.iter().rev().find(|(n, _)| n == name).map(|(_, s)| *s)
    }
}

/// A lowered formula plus the scalar register count it needs.
#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    pub root: Node,
    pub scalars: usize,
}

pub(crate) fn compile(e: &Expr, layout: &Layout) -> Result<Compiled, EvalError> {
    let mut scratch = layout.clone();
    let root = lower(e, &mut scratch)?;
    Ok(Compiled {
        root,
        scalars: scratch.scalars,
    })
}

fn lower(e: &Expr, layout: &mut Layout) -> Result<Node, EvalError> {
    let b = |n| Box::new(n);
    Ok(match &e.kind {
        ExprKind::Int(v) => Node::Int(*v),
        ExprKind::Bool(v) => Node::Bool(*v),
        ExprKind::Var(name) => match layout.find(name) {
            Some(Slot::Scalar(i)) => Node::Scalar(i),
            Some(Slot::Seq(i)) => Node::Seq(i),
            None => {
                return Err(EvalError {
                    kind: EvalErrorKind::UnboundVariable(name.clone()),
                    span: e.span,
                })
            }
        },
        ExprKind::Unary(UnaryOp::Not, a) => Node::Not(b(lower(a, layout)?)),
        ExprKind::Unary(UnaryOp::Neg, a) => Node::Neg(b(lower(a, layout)?), e.span),
        ExprKind::Binary(op, l, r) => Node::Bin(*op, b(lower(l, layout)?), b(lower(r, layout)?), e.span),
        ExprKind::Index(s, i) => Node::Index(b(lower(s, layout)?), b(lower(i, layout)?), e.span),
        ExprKind::Len(s) => Node::Len(b(lower(s, layout)?)),
        ExprKind::Quant(q, v, body) => {
            let slot = match layout.push(v, Type::Int) {
                Slot::Scalar(i) => i,
                Slot::Seq(_) => unreachable!("quantified variables are ints"),
            };
            let body = lower(body, layout)?;
            layout.names.pop();
            Node::Quant(*q, slot, b(body))
        }
    })
}

#[derive(Clone, Copy)]
enum V<'s> {
    Int(i64),
    Bool(bool),
    Seq(&'s [i64]),
}

impl V<'_> {
    fn int(self) -> i64 {
        match self {
            V::Int(v) => v,
            V::Bool(b) => b as i64,
            V::Seq(_) => unreachable!("typechecked: expected int"),
        }
    }

    fn bool(self) -> bool {
        match self {
            V::Bool(b) => b,
            V::Int(v) => v != 0,
            V::Seq(_) => unreachable!("typechecked: expected bool"),
        }
    }
}

pub(crate) struct Machine<'s> {
    pub scalars: Vec<i64>,
    pub seqs: &'s [&'s [i64]],
    pub lo: i64,
    pub hi: i64,
}

fn arith_err(span: Span) -> EvalError {
    EvalError {
        kind: EvalErrorKind::Overflow,
        span,
    }
}

impl<'s> Machine<'s> {
    pub fn new(scalars: Vec<i64>, seqs: &'s [&'s [i64]], bounds: &EvaluationBounds) -> Self {
        let (lo, hi) = bounds.quantifier_range();
        Self { scalars, seqs, lo, hi }
    }

    pub fn truth(&mut self, n: &Node) -> Result<bool, EvalError> {
        Ok(self.eval(n)?.bool())
    }

    fn seq_of(&self, n: &Node) -> &'s [i64] {
        match n {
            Node::Seq(i) => self.seqs[*i],
            _ => unreachable!("typechecked: sequence operands are variables"),
        }
    }

    fn eval(&mut self, n: &Node) -> Result<V<'s>, EvalError> {
        Ok(match n {
            Node::Int(v) => V::Int(*v),
            Node::Bool(b) => V::Bool(*b),
            Node::Scalar(i) => V::Int(self.scalars[*i]),
            Node::Seq(i) => V::Seq(self.seqs[*i]),
            Node::Not(a) => V::Bool(!self.eval(a)?.bool()),
            Node::Neg(a, span) => V::Int(self.eval(a)?.int().checked_neg().ok_or_else(|| arith_err(*span))?),
            Node::Len(s) => V::Int(self.seq_of(s).len() as i64),
            Node::Index(s, i, span) => {
                let seq = self.seq_of(s);
                let idx = self.eval(i)?.int();
                if idx < 0 || idx as usize >= seq.len() {
                    return Err(EvalError {
                        kind: EvalErrorKind::IndexOutOfRange {
                            index: idx,
                            len: seq.len(),
                        },
                        span: *span,
                    });
                }
                V::Int(seq[idx as usize])
            }
            Node::Bin(op, l, r, span) => match op {
                BinOp::And => V::Bool(self.eval(l)?.bool() && self.eval(r)?.bool()),
                BinOp::Or => V::Bool(self.eval(l)?.bool() || self.eval(r)?.bool()),
                BinOp::Implies => V::Bool(!self.eval(l)?.bool() || self.eval(r)?.bool()),
                BinOp::Iff => {
                    let a = self.eval(l)?.bool();
                    V::Bool(a == self.eval(r)?.bool())
                }
                BinOp::Eq | BinOp::Ne => {
                    let a = self.eval(l)?;
                    let b = self.eval(r)?;
                    let eq = match (a, b) {
                        (V::Seq(x), V::Seq(y)) => x == y,
                        (x, y) => x.int() == y.int(),
                    };
                    V::Bool(if *op == BinOp::Eq { eq } else { !eq })
                }
                _ => {
                    let a = self.eval(l)?.int();
                    let b = self.eval(r)?.int();
                    match op {
                        BinOp::Lt => V::Bool(a < b),
                        BinOp::Le => V::Bool(a <= b),
                        BinOp::Gt => V::Bool(a > b),
                        BinOp::Ge => V::Bool(a >= b),
                        BinOp::Add => V::Int(a.checked_add(b).ok_or_else(|| arith_err(*span))?),
                        BinOp::Sub => V::Int(a.checked_sub(b).ok_or_else(|| arith_err(*span))?),
                        BinOp::Mul => V::Int(a.checked_mul(b).ok_or_else(|| arith_err(*span))?),
                        BinOp::Div | BinOp::Mod => {
                            if b == 0 {
                                return Err(EvalError {
                                    kind: EvalErrorKind::DivisionByZero,
                                    span: *span,
                                });
                            }
                            let v = if *op == BinOp::Div {
                                a.checked_div_euclid(b)
                            } else {
                                a.checked_rem_euclid(b)
                            };
                            V::Int(v.ok_or_else(|| arith_err(*span))?)
                        }
                        _ => unreachable!("logical ops handled above"),
                    }
                }
            },
            Node::Quant(q, slot, body) => {
                let mut acc = *q == Quantifier::Forall;
                for v in self.lo..=self.hi {
                    self.scalars[*slot] = v;
                    let b = self.eval(body)?.bool();
                    match q {
                        Quantifier::Forall => acc &= b,
                        Quantifier::Exists => acc |= b,
                    }
                }
                V::Bool(acc)
            }
        })
    }
}

/// Loads env values into registers according to `layout`.
fn load<'e>(layout: &Layout, env: &'e Env, scalars: &mut [i64], seqs: &mut [&'e [i64]]) {
    for (name, slot) in &layout.names {
        match (slot, env.get(name)) {
            (Slot::Scalar(i), Some(Value::Int(v))) => scalars[*i] = *v,
            (Slot::Scalar(i), Some(Value::Bool(b))) => scalars[*i] = *b as i64,
            (Slot::Seq(i), Some(Value::Seq(s))) => seqs[*i] = s,
            _ => {}
        }
    }
}

/// Evaluates a boolean formula under `env`. Variables are typed by the
/// values `env` gives them; quantifiers range over `bounds`.
pub fn evaluate(f: &Expr, env: &Env, bounds: &EvaluationBounds) -> Result<bool, EvalError> {
    let params: Vec<Param> = env.iter().map(|(k, v)| Param::new(k.clone(), v.ty())).collect();
    let sig = Signature {
        method_name: "env".into(),
        params: params.clone(),
        returns: Vec::new(),
    };
    // Unbound names surface as UnboundVariable from lowering; other
    // typing problems are reported as IllTyped.
    let layout = Layout::from_params(&params);
    let compiled = compile(f, &layout)?;
    check_formula(f, &sig, Clause::Ensures).map_err(|e| EvalError {
        kind: EvalErrorKind::IllTyped(e.message),
        span: e.span,
    })?;
    let mut seqs: Vec<&[i64]> = vec![&[]; layout.seqs];
    let mut scalars = vec![0; compiled.scalars];
    load(&layout, env, &mut scalars, &mut seqs);
    Machine::new(scalars, &seqs, bounds).truth(&compiled.root)
}
