//! Surface-syntax printing with minimal parentheses. Output reparses to
//! a structurally identical tree.

use super::ast::{BinOp, Expr, ExprKind, Signature, SpecPair, UnaryOp};
use std::fmt::{self, Display, Write};

const IFF: u8 = 1;
const IMPLIES: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const NOT: u8 = 5;
const CMP: u8 = 6;
const ADD: u8 = 7;
const MUL: u8 = 8;
const NEG: u8 = 9;
const POSTFIX: u8 = 10;
const ATOM: u8 = 11;

fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Int(v) if *v < 0 => NEG,
        ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Var(_) | ExprKind::Len(_) | ExprKind::Quant(..) => ATOM,
        ExprKind::Unary(UnaryOp::Not, _) => NOT,
        ExprKind::Unary(UnaryOp::Neg, _) => NEG,
        ExprKind::Index(..) => POSTFIX,
        ExprKind::Binary(op, ..) => binop_prec(*op),
    }
}

fn binop_prec(op: BinOp) -> u8 {
    match op {
        BinOp::Iff => IFF,
        BinOp::Implies => IMPLIES,
        BinOp::Or => OR,
        BinOp::And => AND,
        BinOp::Add | BinOp::Sub => ADD,
        BinOp::Mul | BinOp::Div | BinOp::Mod => MUL,
        _ => CMP,
    }
}

/// Minimum precedence required of (left, right) operands.
fn operand_prec(op: BinOp) -> (u8, u8) {
    match op {
        BinOp::Iff => (IFF, IMPLIES),
        BinOp::Implies => (OR, IMPLIES),
        BinOp::Or => (OR, AND),
        BinOp::And => (AND, NOT),
        BinOp::Add | BinOp::Sub => (ADD, MUL),
        BinOp::Mul | BinOp::Div | BinOp::Mod => (MUL, NEG),
        _ => (ADD, ADD),
    }
}

fn write_at(out: &mut impl Write, e: &Expr, min: u8) -> fmt::Result {
    if prec(e) < min {
        out.write_char('(')?;
        write_expr(out, e)?;
        out.write_char(')')
    } else {
        write_expr(out, e)
    }
}

fn write_expr(out: &mut impl Write, e: &Expr) -> fmt::Result {
    match &e.kind {
        ExprKind::Int(v) => write!(out, "{v}"),
        ExprKind::Bool(b) => write!(out, "{b}"),
        ExprKind::Var(n) => out.write_str(n),
        ExprKind::Unary(UnaryOp::Not, a) => {
            out.write_char('!')?;
            write_at(out, a, NOT)
        }
        ExprKind::Unary(UnaryOp::Neg, a) => {
            out.write_char('-')?;
            write_at(out, a, NEG)
        }
        ExprKind::Binary(op, a, b) => {
            let (lmin, rmin) = operand_prec(*op);
            write_at(out, a, lmin)?;
            write!(out, " {} ", op.symbol())?;
            write_at(out, b, rmin)
        }
        ExprKind::Index(s, i) => {
            write_at(out, s, POSTFIX)?;
            out.write_char('[')?;
            write_expr(out, i)?;
            out.write_char(']')
        }
        ExprKind::Len(s) => {
            out.write_char('|')?;
            write_expr(out, s)?;
            out.write_char('|')
        }
        ExprKind::Quant(q, v, body) => {
            write!(out, "({} {v} :: ", q.keyword())?;
            write_expr(out, body)?;
            out.write_char(')')
        }
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}

impl Display for SpecPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let clauses = self
            .preconditions
            .iter()
            .map(|e| ("requires", e))
            .chain(self.postconditions.iter().map(|e| ("ensures", e)));
        for (kw, e) in clauses {
            if !first {
                f.write_char('\n')?;
            }
            first = false;
            write!(f, "{kw} {e};")?;
        }
        Ok(())
    }
}

impl Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |ps: &[super::ast::Param]| {
            ps.iter()
                .map(|p| format!("{}: {}", p.name, p.ty))
                .collect::<Vec<_>>()
                .join(", ")
        };
        write!(f, "method {}({})", self.method_name, list(&self.params))?;
        if !self.returns.is_empty() {
            write!(f, " returns ({})", list(&self.returns))?;
        }
        Ok(())
    }
}
