//! A small Dafny-flavoured specification language: `requires`/`ensures`
//! clauses over `int`, `bool` and `seq<int>` method signatures.
//!
//! Besides parsing and typechecking, the module decides implication and
//! equivalence by exhaustive evaluation over bounded domains, diagnoses
//! how a candidate spec deviates from a reference one, and exports
//! SMT-LIB 2 queries for use with an external solver.

pub mod ast;
pub mod bounded;
pub mod diagnose;
pub mod error;
pub mod eval;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod smtlib;
pub mod typecheck;

pub use ast::{BinOp, Expr, ExprKind, Formula, Param, Quantifier, Signature, Span, SpecPair, Type, UnaryOp};
pub use bounded::{
    equivalence_counterexample, equivalent_bounded, fingerprint, implication_counterexample, implies_bounded,
    BoundedError, Disagreement, EvaluationBounds, Outcome, SpecFingerprint,
};
pub use diagnose::{diagnose, Diagnosis, MistakeLabel};
pub use error::{ErrorCategory, SpecError};
pub use eval::{evaluate, format_env, Env, EvalError, EvalErrorKind, Value};
pub use parser::{parse_expr, parse_signature, parse_spec, parse_spec_untyped};
pub use smtlib::to_smtlib;
pub use typecheck::{check_formula, check_signature, check_spec, Clause};
