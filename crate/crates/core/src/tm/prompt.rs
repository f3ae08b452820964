//! `{name}` placeholder substitution. `{{` and `}}` produce literal braces.

use super::fewshot::FewShotEntry;
use super::{InputCase, TmError};

const PLACEHOLDERS: [&str; 4] = ["docstring", "signature", "examples", "feedback"];

enum Piece<'t> {
    Text(&'t str),
    Brace(char),
    Hole(&'t str),
}

fn pieces(template: &str) -> Result<Vec<Piece<'_>>, String> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(pos) = rest.find(['{', '}']) {
        out.push(Piece::Text(&rest[..pos]));
        let tail = &rest[pos..];
        if tail.starts_with("{{") {
            out.push(Piece::Brace('{'));
            rest = &tail[2..];
        } else if tail.starts_with("}}") {
            out.push(Piece::Brace('}'));
            rest = &tail[2..];
        } else if tail.starts_with('}') {
            return Err(format!("unmatched '}}' at byte {}", template.len() - tail.len()));
        } else {
            let close = tail.find('}').ok_or_else(|| "unclosed '{'".to_string())?;
            let name = &tail[1..close];
            if !PLACEHOLDERS.contains(&name) {
                return Err(format!("unknown placeholder {{{name}}}"));
            }
            out.push(Piece::Hole(name));
            rest = &tail[close + 1..];
        }
    }
    out.push(Piece::Text(rest));
    Ok(out)
}

/// Checks placeholder names; `{feedback}` is only allowed in corrective
/// templates.
pub fn check_template(template: &str, corrective: bool) -> Result<(), String> {
    for p in pieces(template)? {
        if let Piece::Hole("feedback") = p {
            if !corrective {
                return Err("{feedback} is only available in the corrective template".into());
            }
        }
    }
    Ok(())
}

pub fn format_examples(examples: &[FewShotEntry]) -> String {
    examples
        .iter()
        .map(|e| format!("Docstring: {}\nSignature: {}\nSpecification:\n{}\n", e.docstring, e.signature, e.spec.trim_end()))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Substitutes the input's docstring and signature, the formatted examples
/// and the optional feedback text. `docstring` overrides the input's own
/// docstring (used after preprocessing).
pub fn render_prompt(
    template: &str,
    input: &InputCase,
    docstring: Option<&str>,
    examples: &[FewShotEntry],
    feedback: Option<&str>,
) -> Result<String, TmError> {
    let mut out = String::with_capacity(template.len() + input.docstring.len());
    for p in pieces(template).map_err(TmError::Template)? {
        match p {
            Piece::Text(t) => out.push_str(t),
            Piece::Brace(c) => out.push(c),
            Piece::Hole("docstring") => out.push_str(docstring.unwrap_or(&input.docstring)),
            Piece::Hole("signature") => out.push_str(&input.signature_text),
            Piece::Hole("examples") => out.push_str(&format_examples(examples)),
            Piece::Hole(_) => match feedback {
                Some(f) => out.push_str(f),
                None => return Err(TmError::Template("{feedback} used without feedback text".into())),
            },
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec_lang::parse_signature;

    fn input() -> InputCase {
        let text = "method Abs(x: int) returns (y: int)";
        InputCase {
            id: "abs".into(),
            docstring: "Returns the absolute value of x.".into(),
            signature: parse_signature(text).unwrap(),
            signature_text: text.into(),
            groundtruth: None,
        }
    }

    fn entry() -> FewShotEntry {
        FewShotEntry {
            docstring: "Doubles x.".into(),
            signature: "method Double(x: int) returns (r: int)".into(),
            spec: "ensures r == 2 * x;".into(),
        }
    }

    #[test]
    fn identity_template() {
        assert_eq!(render_prompt("{docstring}", &input(), None, &[entry()], None).unwrap(), input().docstring);
    }

    #[test]
    fn template_without_examples_ignores_them() {
        let p = render_prompt("{signature}", &input(), None, &[entry()], None).unwrap();
        assert_eq!(p, "method Abs(x: int) returns (y: int)");
    }

    #[test]
    fn examples_and_escapes() {
        let p = render_prompt("{{x}} {examples}", &input(), None, &[entry()], None).unwrap();
        assert!(p.starts_with("{x} Docstring: Doubles x.\n"));
        assert!(p.contains("ensures r == 2 * x;"));
    }

    #[test]
    fn feedback_embedded_verbatim() {
        let msg = "1:14: syntax error: expected expression, found ';'";
        let p = render_prompt("fix: {feedback}", &input(), None, &[], Some(msg)).unwrap();
        assert_eq!(p, format!("fix: {msg}"));
        assert!(render_prompt("fix: {feedback}", &input(), None, &[], None).is_err());
    }

    #[test]
    fn unknown_or_malformed_placeholders() {
        assert!(render_prompt("{docs}", &input(), None, &[], None).is_err());
        assert!(render_prompt("{docstring", &input(), None, &[], None).is_err());
        assert!(render_prompt("}", &input(), None, &[], None).is_err());
        assert!(check_template("{feedback}", false).is_err());
        assert!(check_template("{feedback}", true).is_ok());
    }

    #[test]
    fn docstring_override() {
        let p = render_prompt("{docstring}", &input(), Some("Preconditions:\n"), &[], None).unwrap();
        assert_eq!(p, "Preconditions:\n");
    }
}
