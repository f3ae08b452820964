use super::ast::{BinOp, Expr, ExprKind, Signature, SpecPair, Type, UnaryOp, VarRole};
use super::error::{ErrorCategory, SpecError};

/// Which clause a formula sits in; preconditions may not mention returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clause {
    Requires,
    Ensures,
}

struct Checker<'a> {
    sig: &'a Signature,
    clause: Clause,
    src: &'a str,
    bound: Vec<String>,
}

impl Checker<'_> {
    fn err(&self, category: ErrorCategory, e: &Expr, msg: impl Into<String>) -> SpecError {
        SpecError::at(self.src, category, e.span, msg)
    }

    fn expect(&mut self, e: &Expr, want: Type) -> Result<(), SpecError> {
        let got = self.infer(e)?;
        if got != want {
            return Err(self.err(
                ErrorCategory::TypeMismatch,
                e,
                format!("expected {want}, found {got}"),
            ));
        }
        Ok(())
    }

    fn infer(&mut self, e: &Expr) -> Result<Type, SpecError> {
        match &e.kind {
            ExprKind::Int(_) => Ok(Type::Int),
            ExprKind::Bool(_) => Ok(Type::Bool),
            ExprKind::Var(name) => {
                if self.bound.iter().any(|b| b == name) {
                    return Ok(Type::Int);
                }
                match self.sig.lookup(name) {
                    Some((_, VarRole::Return)) if self.clause == Clause::Requires => Err(self.err(
                        ErrorCategory::UnknownIdentifier,
                        e,
                        format!("return value `{name}` is not in scope in a precondition"),
                    )),
                    Some((p, _)) => Ok(p.ty),
                    None => Err(self.err(
                        ErrorCategory::UnknownIdentifier,
                        e,
                        format!("unknown identifier `{name}`"),
                    )),
                }
            }
            ExprKind::Unary(UnaryOp::Not, a) => {
                self.expect(a, Type::Bool)?;
                Ok(Type::Bool)
            }
            ExprKind::Unary(UnaryOp::Neg, a) => {
                self.expect(a, Type::Int)?;
                Ok(Type::Int)
            }
            ExprKind::Binary(op, a, b) => match op {
                BinOp::Eq | BinOp::Ne => {
                    let ta = self.infer(a)?;
                    self.expect(b, ta)?;
                    Ok(Type::Bool)
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    self.expect(a, Type::Int)?;
                    self.expect(b, Type::Int)?;
                    Ok(Type::Bool)
                }
                op if op.is_arithmetic() => {
                    self.expect(a, Type::Int)?;
                    self.expect(b, Type::Int)?;
                    Ok(Type::Int)
                }
                _ => {
                    self.expect(a, Type::Bool)?;
                    self.expect(b, Type::Bool)?;
                    Ok(Type::Bool)
                }
            },
            ExprKind::Index(s, i) => {
                self.expect(s, Type::IntSeq)?;
                self.expect(i, Type::Int)?;
                Ok(Type::Int)
            }
            ExprKind::Len(s) => {
                self.expect(s, Type::IntSeq)?;
                Ok(Type::Int)
            }
            ExprKind::Quant(_, var, body) => {
                if self.bound.contains(var) || self.sig.lookup(var).is_some() {
                    return Err(self.err(
                        ErrorCategory::DuplicateBinding,
                        e,
                        format!("bound variable `{var}` shadows a name already in scope"),
                    ));
                }
                self.bound.push(var.clone());
                let r = self.expect(body, Type::Bool);
                self.bound.pop();
                r?;
                Ok(Type::Bool)
            }
        }
    }
}

/// Typechecks a single boolean formula in the given clause. `src` is the
/// text the formula was parsed from, used only to locate errors.
pub fn check_formula_in(f: &Expr, sig: &Signature, clause: Clause, src: &str) -> Result<(), SpecError> {
    let mut c = Checker {
        sig,
        clause,
        src,
        bound: Vec::new(),
    };
    c.expect(f, Type::Bool)
}

pub fn check_formula(f: &Expr, sig: &Signature, clause: Clause) -> Result<(), SpecError> {
    check_formula_in(f, sig, clause, "")
}

pub(crate) fn check_spec_in(spec: &SpecPair, sig: &Signature, src: &str) -> Result<(), SpecError> {
    for f in &spec.preconditions {
        check_formula_in(f, sig, Clause::Requires, src)?;
    }
    for f in &spec.postconditions {
        check_formula_in(f, sig, Clause::Ensures, src)?;
    }
    Ok(())
}

/// Typechecks a spec built in code (no source text for locations).
pub fn check_spec(spec: &SpecPair, sig: &Signature) -> Result<(), SpecError> {
    check_spec_in(spec, sig, "")
}

/// Rejects signatures that declare a name twice.
pub fn check_signature(sig: &Signature) -> Result<(), SpecError> {
    let mut seen: Vec<&str> = Vec::new();
    for p in sig.variables() {
        if seen.contains(&p.name.as_str()) {
            return Err(SpecError::at(
                "",
                ErrorCategory::DuplicateBinding,
                Default::default(),
                format!("`{}` is declared more than once", p.name),
            ));
        }
        seen.push(&p.name);
    }
    Ok(())
}
