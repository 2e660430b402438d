//! Just enough S-expression reading for SMT-LIB2 scripts and solver models.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a) => Some(a),
            Sexp::List(_) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items) => Some(items),
            Sexp::Atom(_) => None,
        }
    }

    /// The leading atom of a list, e.g. `assert` in `(assert ...)`.
    pub fn head(&self) -> Option<&str> {
        self.as_list()?.first()?.as_atom()
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a) => f.write_str(a),
            Sexp::List(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SexpError {
    #[error("unbalanced `)` at byte {0}")]
    UnexpectedClose(usize),
    #[error("unterminated list opened at byte {0}")]
    Unterminated(usize),
    #[error("unterminated string literal at byte {0}")]
    UnterminatedString(usize),
}

/// Parses a sequence of top-level S-expressions. `;` starts a line comment;
/// `"..."` strings and `|...|` quoted symbols are kept as single atoms.
pub fn parse_sexps(text: &str) -> Result<Vec<Sexp>, SexpError> {
    let bytes = text.as_bytes();
    let mut stack: Vec<(usize, Vec<Sexp>)> = Vec::new();
    let mut top = Vec::new();
    let mut i = 0;
    let push =
        |stack: &mut Vec<(usize, Vec<Sexp>)>, top: &mut Vec<Sexp>, item| match stack.last_mut() {
            Some((_, items)) => items.push(item),
            None => top.push(item),
        };
    while i < bytes.len() {
        match bytes[i] {
            b';' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'(' => {
                stack.push((i, Vec::new()));
                i += 1;
            }
            b')' => {
                let (_, items) = stack.pop().ok_or(SexpError::UnexpectedClose(i))?;
                push(&mut stack, &mut top, Sexp::List(items));
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            quote @ (b'"' | b'|') => {
                let start = i;
                i += 1;
                loop {
                    match bytes.get(i) {
                        None => return Err(SexpError::UnterminatedString(start)),
                        // `""` is an escaped quote inside SMT-LIB strings.
                        Some(&b'"') if quote == b'"' && bytes.get(i + 1) == Some(&b'"') => i += 2,
                        Some(&c) if c == quote => {
                            i += 1;
                            break;
                        }
                        Some(_) => i += 1,
                    }
                }
                push(&mut stack, &mut top, Sexp::Atom(text[start..i].to_string()));
            }
            _ => {
                let start = i;
                while i < bytes.len()
                    && !matches!(bytes[i], b'(' | b')' | b';')
                    && !bytes[i].is_ascii_whitespace()
                {
                    i += 1;
                }
                push(&mut stack, &mut top, Sexp::Atom(text[start..i].to_string()));
            }
        }
    }
    if let Some((start, _)) = stack.pop() {
        return Err(SexpError::Unterminated(start));
    }
    Ok(top)
}
