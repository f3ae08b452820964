use super::ast::Span;
use super::error::{ErrorCategory, SpecError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Int(i64),
    Ident(String),
    // keywords
    Requires,
    Ensures,
    Forall,
    Exists,
    True,
    False,
    Method,
    Returns,
    IntTy,
    BoolTy,
    SeqTy,
    // punctuation
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    ColonColon,
    Pipe,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    Bang,
    AndAnd,
    OrOr,
    Implies,
    Iff,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Ident(n) => format!("identifier `{n}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Requires => "requires",
            Tok::Ensures => "ensures",
            Tok::Forall => "forall",
            Tok::Exists => "exists",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Method => "method",
            Tok::Returns => "returns",
            Tok::IntTy => "int",
            Tok::BoolTy => "bool",
            Tok::SeqTy => "seq",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::ColonColon => "::",
            Tok::Pipe => "|",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            Tok::Bang => "!",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Implies => "==>",
            Tok::Iff => "<==>",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Percent => "%",
            Tok::Int(_) | Tok::Ident(_) | Tok::Eof => "",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "requires" => Tok::Requires,
        "ensures" => Tok::Ensures,
        "forall" => Tok::Forall,
        "exists" => Tok::Exists,
        "true" => Tok::True,
        "false" => Tok::False,
        "method" => Tok::Method,
        "returns" => Tok::Returns,
        "int" => Tok::IntTy,
        "bool" => Tok::BoolTy,
        "seq" => Tok::SeqTy,
        _ => return None,
    })
}

// Longest match first.
const PUNCT: &[(&str, Tok)] = &[
    ("<==>", Tok::Iff),
    ("==>", Tok::Implies),
    ("::", Tok::ColonColon),
    ("<=", Tok::Le),
    (">=", Tok::Ge),
    ("==", Tok::EqEq),
    ("!=", Tok::Ne),
    ("&&", Tok::AndAnd),
    ("||", Tok::OrOr),
    ("(", Tok::LParen),
    (")", Tok::RParen),
    ("[", Tok::LBracket),
    ("]", Tok::RBracket),
    (",", Tok::Comma),
    (";", Tok::Semi),
    (":", Tok::Colon),
    ("|", Tok::Pipe),
    ("<", Tok::Lt),
    (">", Tok::Gt),
    ("!", Tok::Bang),
    ("+", Tok::Plus),
    ("-", Tok::Minus),
    ("*", Tok::Star),
    ("/", Tok::Slash),
    ("%", Tok::Percent),
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, SpecError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if src[i..].starts_with("//") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let span = Span::new(start, i);
            let value = src[start..i].parse::<i64>().map_err(|_| {
                SpecError::at(src, ErrorCategory::Lexical, span, "integer literal out of range")
            })?;
            out.push(Token {
                tok: Tok::Int(value),
                span,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &src[start..i];
            let tok = keyword(word).unwrap_or_else(|| Tok::Ident(word.to_string()));
            out.push(Token {
                tok,
                span: Span::new(start, i),
            });
            continue;
        }
        for (text, tok) in PUNCT {
            if src[i..].starts_with(text) {
                out.push(Token {
                    tok: tok.clone(),
                    span: Span::new(i, i + text.len()),
                });
                i += text.len();
                continue 'outer;
            }
        }
        let ch = src[i..].chars().next().unwrap_or('?');
        return Err(SpecError::at(
            src,
            ErrorCategory::Lexical,
            Span::new(i, i + ch.len_utf8()),
            format!("unexpected character `{ch}`"),
        ));
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(src.len(), src.len()),
    });
    Ok(out)
}
