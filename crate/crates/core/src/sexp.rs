//! A small s-expression reader with source locations.

use std::fmt;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SexpKind {
    Atom(String),
    List(Vec<Sexp>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sexp {
    pub kind: SexpKind,
    pub line: usize,
    pub col: usize,
}

impl Sexp {
    pub fn atom(&self) -> Option<&str> {
        match &self.kind {
            SexpKind::Atom(a) => Some(a),
            SexpKind::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match &self.kind {
            SexpKind::List(items) => Some(items),
            SexpKind::Atom(_) => None,
        }
    }

    /// The head atom of a list form, e.g. `let` in `(let x nat e1 e2)`.
    pub fn head(&self) -> Option<&str> {
        self.list().and_then(|l| l.first()).and_then(Sexp::atom)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at {line}:{col}: expected {expected}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub expected: String,
}

impl ParseError {
    pub fn at(s: &Sexp, expected: impl Into<String>) -> Self {
        ParseError { line: s.line, col: s.col, expected: expected.into() }
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Reader<'a> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn err(&self, expected: &str) -> ParseError {
        ParseError { line: self.line, col: self.col, expected: expected.to_string() }
    }

    fn read(&mut self) -> Result<Sexp, ParseError> {
        self.skip_ws();
        let (line, col) = (self.line, self.col);
        match self.chars.peek().copied() {
            None => Err(self.err("an expression")),
            Some(')') => Err(self.err("an expression, found `)`")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.chars.peek() {
                        None => return Err(self.err("`)`")),
                        Some(')') => {
                            self.bump();
                            break;
                        }
                        _ => items.push(self.read()?),
                    }
                }
                Ok(Sexp { kind: SexpKind::List(items), line, col })
            }
            Some(_) => {
                let mut a = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    a.push(c);
                    self.bump();
                }
                Ok(Sexp { kind: SexpKind::Atom(a), line, col })
            }
        }
    }
}

/// Reads exactly one s-expression from `text`.
pub fn parse_sexp(text: &str) -> Result<Sexp, ParseError> {
    let mut r = Reader { chars: text.chars().peekable(), line: 1, col: 1 };
    let s = r.read()?;
    r.skip_ws();
    if r.chars.peek().is_some() {
        return Err(r.err("end of input"));
    }
    Ok(s)
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SexpKind::Atom(a) => f.write_str(a),
            SexpKind::List(items) => {
                write!(f, "(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{it}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Identifiers are atoms that are neither numerals nor reserved words.
pub fn is_identifier(a: &str) -> bool {
    let mut cs = a.chars();
    match cs.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_with_positions() {
        let s = parse_sexp("(a (b 1)\n  c)").unwrap();
        let items = s.list().unwrap();
        assert_eq!(items[0].atom(), Some("a"));
        assert_eq!(items[1].head(), Some("b"));
        assert_eq!((items[2].line, items[2].col), (2, 3));
        assert_eq!(s.to_string(), "(a (b 1) c)");
    }

    #[test]
    fn reports_unbalanced_input() {
        let e = parse_sexp("(a (b)").unwrap_err();
        assert_eq!(e.expected, "`)`");
        assert!(parse_sexp("a b").is_err());
        assert!(parse_sexp(")").is_err());
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(parse_sexp("; hi\n(x) ; tail").unwrap().to_string(), "(x)");
    }
}
