//! Concrete syntax for terms, rewrite systems and precedences.
//!
//! ```text
//! term   := var | node
//! var    := '?' ident
//! node   := ident marker? args?
//! marker := '*' | '^' nat | '_'
//! args   := '(' [ term { ',' term } ] ')'
//! ```
//!
//! Whitespace between tokens is ignored.

use crate::error::{PrecedenceError, TermError};
use crate::precedence::Precedence;
use crate::term::{Marker, Node, Symbol, Term};

pub fn parse_term(text: &str) -> Result<Term, TermError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let t = p.term()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("trailing input"));
    }
    Ok(t)
}

pub fn format_term(t: &Term) -> String {
    t.to_string()
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> TermError {
        TermError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn ident(&mut self) -> Result<String, TermError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected identifier"));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn nat(&mut self) -> Result<u32, TermError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected energy"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| TermError::Syntax {
                offset: start,
                message: "energy out of range".into(),
            })
    }

    fn term(&mut self) -> Result<Term, TermError> {
        if self.peek() == Some(b'?') {
            self.pos += 1;
            let name = self.ident()?;
            if matches!(self.peek(), Some(b'*' | b'^' | b'_')) {
                return Err(TermError::MarkerOnVariable(name));
            }
            if self.peek() == Some(b'(') {
                return Err(self.error("variables cannot have arguments"));
            }
            return Ok(Term::var(name));
        }
        let name = self.ident()?;
        let marker = match self.peek() {
            Some(b'*') => {
                self.pos += 1;
                Marker::Star
            }
            Some(b'_') => {
                self.pos += 1;
                Marker::Underline
            }
            Some(b'^') => {
                self.pos += 1;
                Marker::Energy(self.nat()?)
            }
            _ => Marker::None,
        };
        let mut children = Vec::new();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            if self.peek() == Some(b')') {
                self.pos += 1;
            } else {
                loop {
                    children.push(self.term()?);
                    match self.peek() {
                        Some(b',') => self.pos += 1,
                        Some(b')') => {
                            self.pos += 1;
                            break;
                        }
                        _ => return Err(self.error("expected ',' or ')'")),
                    }
                }
            }
        }
        Ok(Term::Node(Node {
            symbol: Symbol::new(name),
            marker,
            children,
        }))
    }
}

/// A rewrite rule `lhs -> rhs` with the usual variable condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteRule {
    pub lhs: Term,
    pub rhs: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TrsError {
    #[error("line {line}: {source}")]
    Term { line: usize, source: TermError },
    #[error("line {line}: {message}")]
    Rule { line: usize, message: String },
}

/// Parses a rewrite system: one `lhs -> rhs` per line, `#` starts a comment.
pub fn parse_trs(text: &str) -> Result<Vec<RewriteRule>, TrsError> {
    let mut rules = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = strip_comment(raw);
        if body.is_empty() {
            continue;
        }
        let (l, r) = body.split_once("->").ok_or_else(|| TrsError::Rule {
            line,
            message: "expected `lhs -> rhs`".into(),
        })?;
        let lhs = parse_term(l).map_err(|source| TrsError::Term { line, source })?;
        let rhs = parse_term(r).map_err(|source| TrsError::Term { line, source })?;
        if lhs.is_var() {
            return Err(TrsError::Rule {
                line,
                message: "left-hand side is a variable".into(),
            });
        }
        if !lhs.is_unmarked() || !rhs.is_unmarked() {
            return Err(TrsError::Rule {
                line,
                message: "rules must not carry markers".into(),
            });
        }
        let lvars = lhs.vars();
        if let Some(v) = rhs.vars().into_iter().find(|v| !lvars.contains(v)) {
            return Err(TrsError::Rule {
                line,
                message: format!("variable ?{v} of the right-hand side does not occur on the left"),
            });
        }
        rules.push(RewriteRule { lhs, rhs });
    }
    Ok(rules)
}

/// Parses precedence generators, one `f > g` per line.
pub fn parse_precedence(text: &str) -> Result<Precedence, PrecedenceError> {
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let body = strip_comment(raw);
        if body.is_empty() {
            continue;
        }
        let (f, g) = body.split_once('>').ok_or_else(|| PrecedenceError::Parse {
            line: idx + 1,
            message: "expected `f > g`".into(),
        })?;
        let (f, g) = (f.trim(), g.trim());
        let ok = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric());
        if !ok(f) || !ok(g) {
            return Err(PrecedenceError::Parse {
                line: idx + 1,
                message: format!("bad symbol in `{body}`"),
            });
        }
        pairs.push((Symbol::new(f), Symbol::new(g)));
    }
    Precedence::new(pairs)
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}
