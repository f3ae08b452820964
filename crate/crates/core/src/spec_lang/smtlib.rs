//! SMT-LIB 2 export of spec-equivalence queries, for checking with an
//! external solver. The generated script is `unsat` exactly when the two
//! specs are equivalent over unbounded integers.
//!
//! Sequences become an uninterpreted length constant `a.len` plus an
//! element function `a.at`. SMT arithmetic is total, so specs whose
//! bounded evaluation hits division by zero or out-of-range indexing can
//! get different answers here than from the bounded checker.

use super::ast::{BinOp, Expr, ExprKind, Quantifier, Signature, SpecPair, Type, UnaryOp};
use std::fmt::Write;

const RESERVED: &[&str] = &[
    "and", "or", "not", "xor", "ite", "let", "forall", "exists", "match", "par", "as", "div", "mod", "abs", "true",
    "false", "distinct", "Int", "Bool", "Real", "Array", "select", "store", "to_real", "to_int", "is_int", "assert",
    "check-sat", "declare-const", "declare-fun", "define-fun", "push", "pop", "exit", "BINARY", "DECIMAL",
    "HEXADECIMAL", "NUMERAL", "STRING",
];

fn sym(name: &str) -> String {
    if RESERVED.contains(&name) {
        format!("|{name}|")
    } else {
        name.to_string()
    }
}

fn seq_len(name: &str) -> String {
    sym(&format!("{name}.len"))
}

fn seq_at(name: &str) -> String {
    sym(&format!("{name}.at"))
}

struct Emitter<'a> {
    sig: &'a Signature,
    fresh: usize,
}

impl Emitter<'_> {
    fn seq_name<'e>(&self, e: &'e Expr) -> &'e str {
        match &e.kind {
            ExprKind::Var(n) => n,
            _ => unreachable!("typechecked: sequence operands are variables"),
        }
    }

    fn is_seq(&self, e: &Expr) -> bool {
        matches!(&e.kind, ExprKind::Var(n)
            if self.sig.lookup(n).map(|(p, _)| p.ty == Type::IntSeq).unwrap_or(false))
    }

    fn term(&mut self, e: &Expr) -> String {
        match &e.kind {
            ExprKind::Int(v) if *v < 0 => format!("(- {})", v.unsigned_abs()),
            ExprKind::Int(v) => v.to_string(),
            ExprKind::Bool(b) => b.to_string(),
            ExprKind::Var(n) => sym(n),
            ExprKind::Unary(UnaryOp::Not, a) => format!("(not {})", self.term(a)),
            ExprKind::Unary(UnaryOp::Neg, a) => format!("(- {})", self.term(a)),
            ExprKind::Len(s) => seq_len(self.seq_name(s)),
            ExprKind::Index(s, i) => format!("({} {})", seq_at(self.seq_name(s)), self.term(i)),
            ExprKind::Quant(q, v, body) => {
                let kw = match q {
                    Quantifier::Forall => "forall",
                    Quantifier::Exists => "exists",
                };
                format!("({kw} (({} Int)) {})", sym(v), self.term(body))
            }
            ExprKind::Binary(op, a, b) if matches!(op, BinOp::Eq | BinOp::Ne) && self.is_seq(a) => {
                let (x, y) = (self.seq_name(a).to_string(), self.seq_name(b).to_string());
                let k = format!("k!{}", self.fresh);
                self.fresh += 1;
                let eq = format!(
                    "(and (= {xl} {yl}) (forall (({k} Int)) (=> (and (<= 0 {k}) (< {k} {xl})) (= ({xa} {k}) ({ya} {k})))))",
                    xl = seq_len(&x),
                    yl = seq_len(&y),
                    xa = seq_at(&x),
                    ya = seq_at(&y),
                );
                if *op == BinOp::Eq {
                    eq
                } else {
                    format!("(not {eq})")
                }
            }
            ExprKind::Binary(op, a, b) => {
                let (x, y) = (self.term(a), self.term(b));
                match op {
                    BinOp::Ne => format!("(not (= {x} {y}))"),
                    _ => {
                        let head = match op {
                            BinOp::Add => "+",
                            BinOp::Sub => "-",
                            BinOp::Mul => "*",
                            BinOp::Div => "div",
                            BinOp::Mod => "mod",
                            BinOp::Eq | BinOp::Iff => "=",
                            BinOp::Lt => "<",
                            BinOp::Le => "<=",
                            BinOp::Gt => ">",
                            BinOp::Ge => ">=",
                            BinOp::And => "and",
                            BinOp::Or => "or",
                            BinOp::Implies => "=>",
                            BinOp::Ne => unreachable!(),
                        };
                        format!("({head} {x} {y})")
                    }
                }
            }
        }
    }

    fn conj(&mut self, fs: &[Expr]) -> String {
        match fs {
            [] => "true".to_string(),
            [one] => self.term(one),
            many => {
                let parts: Vec<String> = many.iter().map(|f| self.term(f)).collect();
                format!("(and {})", parts.join(" "))
            }
        }
    }
}

/// Declarations for every signature variable.
pub fn declarations(sig: &Signature) -> String {
    let mut out = String::new();
    for p in sig.variables() {
        match p.ty {
            Type::Int => writeln!(out, "(declare-const {} Int)", sym(&p.name)),
            Type::Bool => writeln!(out, "(declare-const {} Bool)", sym(&p.name)),
            Type::IntSeq => writeln!(
                out,
                "(declare-const {l} Int)\n(declare-fun {a} (Int) Int)\n(assert (>= {l} 0))",
                l = seq_len(&p.name),
                a = seq_at(&p.name)
            ),
        }
        .expect("writing to a String cannot fail");
    }
    out
}

/// A script asserting that `s1` and `s2` differ: either the preconditions
/// disagree, or both hold and the postconditions disagree. `unsat` means
/// equivalent. Both specs must typecheck under `sig`.
pub fn to_smtlib(s1: &SpecPair, s2: &SpecPair, sig: &Signature) -> String {
    let mut em = Emitter { sig, fresh: 0 };
    let pre1 = em.conj(&s1.preconditions);
    let pre2 = em.conj(&s2.preconditions);
    let post1 = em.conj(&s1.postconditions);
    let post2 = em.conj(&s2.postconditions);
    let mut out = String::new();
    writeln!(out, "; equivalence query for {}", sig.method_name).unwrap();
    out.push_str("(set-logic ALL)\n");
    out.push_str(&declarations(sig));
    writeln!(out, "(assert (not (and (= {pre1} {pre2}) (=> {pre1} (= {post1} {post2})))))").unwrap();
    out.push_str("(check-sat)\n");
    out
}
