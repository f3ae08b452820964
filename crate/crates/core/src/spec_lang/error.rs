use super::ast::Span;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorCategory {
    Lexical,
    Syntax,
    UnknownIdentifier,
    TypeMismatch,
    /// A quantifier rebinds a name that is already in scope, or a
    /// signature declares the same name twice.
    DuplicateBinding,
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorCategory::Lexical => "lexical error",
            ErrorCategory::Syntax => "syntax error",
            ErrorCategory::UnknownIdentifier => "unknown identifier",
            ErrorCategory::TypeMismatch => "type mismatch",
            ErrorCategory::DuplicateBinding => "duplicate binding",
        })
    }
}

/// A located error from lexing, parsing or typechecking. The `Display`
/// form (`line:column: category: message`) is what gets fed back to a
/// model as corrective feedback.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {category}: {message}")]
pub struct SpecError {
    pub category: ErrorCategory,
    pub message: String,
    pub span: Span,
    pub line: usize,
    pub column: usize,
}

impl SpecError {
    pub(crate) fn at(src: &str, category: ErrorCategory, span: Span, message: impl Into<String>) -> Self {
        let (line, column) = line_col(src, span.start);
        Self {
            category,
            message: message.into(),
            span,
            line,
            column,
        }
    }
}

/// 1-based line and column (in chars) of a byte offset.
pub fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(src.len());
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let line_start = before.rfind('\n').map(|i| i + 1).unwrap_or(0);
    let column = before[line_start..].chars().count() + 1;
    (line, column)
}
