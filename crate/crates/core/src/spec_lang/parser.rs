//! Recursive-descent parser for signatures and `requires`/`ensures` specs.
//!
//! Precedence, loosest first: `<==>`, `==>` (right-assoc), `||`, `&&`,
//! prefix `!` and quantifiers, comparisons (chainable, `0 <= i < n`),
//! `+ -`, `* / %`, unary `-`, postfix indexing.

use super::ast::{BinOp, Expr, ExprKind, Param, Quantifier, Signature, Span, SpecPair, Type, UnaryOp};
use super::error::{ErrorCategory, SpecError};
use super::lexer::{tokenize, Tok, Token};
use super::typecheck::check_spec_in;

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, SpecError>;

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> PResult<Self> {
        Ok(Self {
            src,
            toks: tokenize(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error_here(&self, msg: impl Into<String>) -> SpecError {
        SpecError::at(self.src, ErrorCategory::Syntax, self.span(), msg)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<Token> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            Err(self.error_here(format!("expected {what}, found {}", self.peek().describe())))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let span = self.bump().span;
                Ok((name, span))
            }
            other => Err(self.error_here(format!("expected {what}, found {}", other.describe()))),
        }
    }

    fn expect_eof(&self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error_here(format!("unexpected {}", self.peek().describe())))
        }
    }

    // ---- signatures -------------------------------------------------

    fn signature(&mut self) -> PResult<Signature> {
        self.expect(Tok::Method, "`method`")?;
        let (method_name, _) = self.ident("method name")?;
        let mut seen: Vec<String> = Vec::new();
        let params = self.param_list(&mut seen)?;
        let returns = if self.eat(&Tok::Returns) {
            self.param_list(&mut seen)?
        } else {
            Vec::new()
        };
        self.expect_eof()?;
        Ok(Signature {
            method_name,
            params,
            returns,
        })
    }

    fn param_list(&mut self, seen: &mut Vec<String>) -> PResult<Vec<Param>> {
        self.expect(Tok::LParen, "`(`")?;
        let mut out = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(out);
        }
        loop {
            let (name, span) = self.ident("parameter name")?;
            if seen.contains(&name) {
                return Err(SpecError::at(
                    self.src,
                    ErrorCategory::DuplicateBinding,
                    span,
                    format!("`{name}` is declared more than once"),
                ));
            }
            seen.push(name.clone());
            self.expect(Tok::Colon, "`:`")?;
            let ty = self.type_name()?;
            out.push(Param { name, ty });
            if self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(Tok::RParen, "`,` or `)`")?;
            return Ok(out);
        }
    }

    fn type_name(&mut self) -> PResult<Type> {
        match self.peek() {
            Tok::IntTy => {
                self.bump();
                Ok(Type::Int)
            }
            Tok::BoolTy => {
                self.bump();
                Ok(Type::Bool)
            }
            Tok::SeqTy => {
                self.bump();
                self.expect(Tok::Lt, "`<`")?;
                self.expect(Tok::IntTy, "`int` (only seq<int> is supported)")?;
                self.expect(Tok::Gt, "`>`")?;
                Ok(Type::IntSeq)
            }
            other => Err(self.error_here(format!(
                "expected a type (int, bool, seq<int>), found {}",
                other.describe()
            ))),
        }
    }

    // ---- specs ------------------------------------------------------

    fn spec(&mut self) -> PResult<SpecPair> {
        let mut spec = SpecPair::default();
        loop {
            match self.peek() {
                Tok::Requires => {
                    if !spec.postconditions.is_empty() {
                        return Err(self.error_here("`requires` clause after an `ensures` clause"));
                    }
                    self.bump();
                    let e = self.expr()?;
                    self.expect(Tok::Semi, "`;`")?;
                    spec.preconditions.push(e);
                }
                Tok::Ensures => {
                    self.bump();
                    let e = self.expr()?;
                    self.expect(Tok::Semi, "`;`")?;
                    spec.postconditions.push(e);
                }
                Tok::Eof => return Ok(spec),
                other => {
                    return Err(self.error_here(format!(
                        "expected `requires`, `ensures` or end of input, found {}",
                        other.describe()
                    )))
                }
            }
        }
    }

    // ---- expressions ------------------------------------------------

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.implies()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.implies()?;
            lhs = bin(BinOp::Iff, lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> PResult<Expr> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.implies()?;
            return Ok(bin(BinOp::Implies, lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> PResult<Expr> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::OrOr {
            self.bump();
            let rhs = self.and()?;
            lhs = bin(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> PResult<Expr> {
        let mut lhs = self.not()?;
        while *self.peek() == Tok::AndAnd {
            self.bump();
            let rhs = self.not()?;
            lhs = bin(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn not(&mut self) -> PResult<Expr> {
        match self.peek() {
            Tok::Bang => {
                let start = self.bump().span;
                let e = self.not()?;
                let span = start.join(e.span);
                Ok(Expr::new(ExprKind::Unary(UnaryOp::Not, Box::new(e)), span))
            }
            Tok::Forall | Tok::Exists => self.quantifier(),
            _ => self.comparison(),
        }
    }

    fn quantifier(&mut self) -> PResult<Expr> {
        let kw = self.bump();
        let q = if kw.tok == Tok::Forall {
            Quantifier::Forall
        } else {
            Quantifier::Exists
        };
        let (var, _) = self.ident("bound variable")?;
        if self.eat(&Tok::Colon) {
            self.expect(Tok::IntTy, "`int` (quantifiers range over integers)")?;
        }
        self.expect(Tok::ColonColon, "`::`")?;
        let body = self.expr()?;
        let span = kw.span.join(body.span);
        Ok(Expr::new(ExprKind::Quant(q, var, Box::new(body)), span))
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let first = self.additive()?;
        let mut operands = vec![first];
        let mut ops = Vec::new();
        while let Some(op) = cmp_op(self.peek()) {
            self.bump();
            ops.push(op);
            operands.push(self.additive()?);
        }
        if ops.is_empty() {
            return Ok(operands.pop().expect("one operand"));
        }
        // a < b <= c  ==>  (a < b) && (b <= c)
        let mut links = ops
            .iter()
            .zip(operands.windows(2))
            .map(|(op, w)| bin(*op, w[0].clone(), w[1].clone()));
        let mut acc = links.next().expect("one link");
        for link in links {
            acc = bin(BinOp::And, acc, link);
        }
        Ok(acc)
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.multiplicative()?;
            lhs = bin(op, lhs, rhs);
        }
    }

    fn multiplicative(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Percent => BinOp::Mod,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = bin(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::Minus {
            let start = self.bump().span;
            let e = self.unary()?;
            let span = start.join(e.span);
            return Ok(Expr::new(ExprKind::Unary(UnaryOp::Neg, Box::new(e)), span));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        while *self.peek() == Tok::LBracket {
            self.bump();
            let idx = self.expr()?;
            let close = self.expect(Tok::RBracket, "`]`")?;
            let span = e.span.join(close.span);
            e = Expr::new(ExprKind::Index(Box::new(e), Box::new(idx)), span);
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::new(ExprKind::Int(v), span))
            }
            Tok::True => {
                self.bump();
                Ok(Expr::new(ExprKind::Bool(true), span))
            }
            Tok::False => {
                self.bump();
                Ok(Expr::new(ExprKind::Bool(false), span))
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(Expr::new(ExprKind::Var(name), span))
            }
            Tok::LParen => {
                self.bump();
                let mut e = self.expr()?;
                let close = self.expect(Tok::RParen, "`)`")?;
                e.span = span.join(close.span);
                Ok(e)
            }
            Tok::Pipe => {
                self.bump();
                let inner = self.expr()?;
                let close = self.expect(Tok::Pipe, "closing `|`")?;
                Ok(Expr::new(ExprKind::Len(Box::new(inner)), span.join(close.span)))
            }
            other => Err(self.error_here(format!("expected expression, found {}", other.describe()))),
        }
    }
}

fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
    let span = l.span.join(r.span);
    Expr::new(ExprKind::Binary(op, Box::new(l), Box::new(r)), span)
}

fn cmp_op(t: &Tok) -> Option<BinOp> {
    Some(match t {
        Tok::EqEq => BinOp::Eq,
        Tok::Ne => BinOp::Ne,
        Tok::Lt => BinOp::Lt,
        Tok::Le => BinOp::Le,
        Tok::Gt => BinOp::Gt,
        Tok::Ge => BinOp::Ge,
        _ => return None,
    })
}

/// Parses `method Name(x: int, a: seq<int>) returns (r: int)`.
pub fn parse_signature(text: &str) -> Result<Signature, SpecError> {
    Parser::new(text)?.signature()
}

/// Parses one expression without typechecking it.
pub fn parse_expr(text: &str) -> Result<Expr, SpecError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

/// Parses spec clauses without typechecking them.
pub fn parse_spec_untyped(text: &str) -> Result<SpecPair, SpecError> {
    Parser::new(text)?.spec()
}

/// Parses and typechecks a spec against `sig`. Errors carry line/column
/// and are suitable for verbatim use as compiler feedback.
pub fn parse_spec(text: &str, sig: &Signature) -> Result<SpecPair, SpecError> {
    let spec = parse_spec_untyped(text)?;
    check_spec_in(&spec, sig, text)?;
    Ok(spec)
}
