use serde::{Deserialize, Serialize};
use std::fmt;

/// Byte range into the source text a node was parsed from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Type {
    Int,
    Bool,
    IntSeq,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => f.write_str("int"),
            Type::Bool => f.write_str("bool"),
            Type::IntSeq => f.write_str("seq<int>"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub ty: Type,
}

impl Param {
    pub fn new(name: impl Into<String>, ty: Type) -> Self {
        Self {
            name: name.into(),
            ty,
        }
    }
}

/// A method header: the variables a specification may talk about.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub method_name: String,
    pub params: Vec<Param>,
    pub returns: Vec<Param>,
}

impl Signature {
    pub fn lookup(&self, name: &str) -> Option<(&Param, VarRole)> {
        self.params
            .iter()
            .find(|p| p.name == name)
            .map(|p| (p, VarRole::Param))
            .or_else(|| {
                self.returns
                    .iter()
                    .find(|p| p.name == name)
                    .map(|p| (p, VarRole::Return))
            })
    }

    /// Params followed by returns, in declaration order.
    pub fn variables(&self) -> impl Iterator<Item = &Param> {
        self.params.iter().chain(self.returns.iter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarRole {
    Param,
    Return,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Implies,
    Iff,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Implies => "==>",
            BinOp::Iff => "<==>",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
        )
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(
            self,
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod
        )
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or | BinOp::Implies | BinOp::Iff)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

impl Quantifier {
    pub fn keyword(self) -> &'static str {
        match self {
            Quantifier::Forall => "forall",
            Quantifier::Exists => "exists",
        }
    }
}

/// Expression node. Equality and hashing ignore spans, so two trees
/// compare equal when they have the same shape regardless of layout.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExprKind {
    Int(i64),
    Bool(bool),
    Var(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Index(Box<Expr>, Box<Expr>),
    Len(Box<Expr>),
    Quant(Quantifier, String, Box<Expr>),
}

/// A boolean-typed expression.
pub type Formula = Expr;

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Expr {}

impl std::hash::Hash for Expr {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.kind.hash(state);
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Self { kind, span }
    }

    /// Builds a node with an empty span; handy for constructing trees in code.
    pub fn synth(kind: ExprKind) -> Self {
        Self::new(kind, Span::default())
    }

    pub fn int(v: i64) -> Self {
        Self::synth(ExprKind::Int(v))
    }

    pub fn boolean(v: bool) -> Self {
        Self::synth(ExprKind::Bool(v))
    }

    pub fn var(name: impl Into<String>) -> Self {
        Self::synth(ExprKind::Var(name.into()))
    }

    pub fn unary(op: UnaryOp, e: Expr) -> Self {
        Self::synth(ExprKind::Unary(op, Box::new(e)))
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Self {
        Self::synth(ExprKind::Binary(op, Box::new(l), Box::new(r)))
    }

    pub fn index(seq: Expr, idx: Expr) -> Self {
        Self::synth(ExprKind::Index(Box::new(seq), Box::new(idx)))
    }

    pub fn len(seq: Expr) -> Self {
        Self::synth(ExprKind::Len(Box::new(seq)))
    }

    pub fn quant(q: Quantifier, var: impl Into<String>, body: Expr) -> Self {
        Self::synth(ExprKind::Quant(q, var.into(), Box::new(body)))
    }

    /// Free variables in first-occurrence order.
    pub fn free_vars(&self) -> Vec<String> {
        fn walk(e: &Expr, bound: &mut Vec<String>, out: &mut Vec<String>) {
            match &e.kind {
                ExprKind::Int(_) | ExprKind::Bool(_) => {}
                ExprKind::Var(n) => {
                    if !bound.contains(n) && !out.contains(n) {
                        out.push(n.clone());
                    }
                }
                ExprKind::Unary(_, a) | ExprKind::Len(a) => walk(a, bound, out),
                ExprKind::Binary(_, a, b) | ExprKind::Index(a, b) => {
                    walk(a, bound, out);
                    walk(b, bound, out);
                }
                ExprKind::Quant(_, v, body) => {
                    bound.push(v.clone());
                    walk(body, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }
}

/// Parsed `requires` / `ensures` clauses. Each list is a conjunction;
/// an empty list stands for `true`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SpecPair {
    pub preconditions: Vec<Formula>,
    pub postconditions: Vec<Formula>,
}

impl SpecPair {
    pub fn new(preconditions: Vec<Formula>, postconditions: Vec<Formula>) -> Self {
        Self {
            preconditions,
            postconditions,
        }
    }
}
