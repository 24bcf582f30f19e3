//! Rule schemas with argument vectors and replicated right-hand-side fragments.
//!
//! Schemas are written in a small pattern language:
//!
//! ```text
//! $F       symbol variable in head position
//! ?y       a single subterm
//! ?xs..    a possibly empty sequence of sibling subterms
//! [p; k]   `k` copies of `p` (right-hand sides only), `k` taken from the parameters
//! *, _     star and underline markers
//! ^$n      energy bound to `n`; ^$n+1 matches energy at least one
//! ```
//!
//! For example the `copy` rule of the star game reads
//! `$F*(?xs..) -> $G([$F*(?xs..); k])` with side condition `F > G`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::SchemaError;
use crate::precedence::Precedence;
use crate::term::{Marker, Node, Position, Symbol, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HeadPat {
    Fixed(Symbol),
    Var(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MarkerPat {
    Exactly(Marker),
    /// Energy `n` (bound on the left, produced on the right).
    Energy(String),
    /// Energy `n + 1`; matches any positive energy and binds `n`.
    EnergySucc(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    Var(String),
    Vector(String),
    Node {
        head: HeadPat,
        marker: MarkerPat,
        children: Vec<Pattern>,
    },
    Repeat {
        body: Box<Pattern>,
        count: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SideCondition {
    /// The first symbol variable is above the second in the precedence.
    Greater(String, String),
    /// The symbol variable is bound to a natural-number label.
    Natural(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSchema {
    pub name: String,
    pub lhs: Pattern,
    pub rhs: Pattern,
    pub side: Vec<SideCondition>,
}

/// Free choices made when instantiating a schema.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SchemaParams {
    /// Lengths of all but the last vector variable in each argument list that
    /// has more than one, in pre-order of the left-hand side.
    pub splits: Vec<usize>,
    pub counts: BTreeMap<String, usize>,
    pub symbols: BTreeMap<String, Symbol>,
    pub energies: BTreeMap<String, u32>,
}

impl SchemaParams {
    pub fn split(mut self, n: usize) -> Self {
        self.splits.push(n);
        self
    }

    pub fn count(mut self, name: &str, k: usize) -> Self {
        self.counts.insert(name.into(), k);
        self
    }

    pub fn symbol(mut self, name: &str, s: Symbol) -> Self {
        self.symbols.insert(name.into(), s);
        self
    }

    pub fn energy(mut self, name: &str, n: u32) -> Self {
        self.energies.insert(name.into(), n);
        self
    }
}

#[derive(Default, Debug)]
struct Bindings {
    terms: BTreeMap<String, Term>,
    vectors: BTreeMap<String, Vec<Term>>,
    symbols: BTreeMap<String, Symbol>,
    energies: BTreeMap<String, u32>,
}

impl RuleSchema {
    /// Parses `lhs -> rhs` in the pattern language.
    pub fn parse(name: &str, text: &str, side: Vec<SideCondition>) -> RuleSchema {
        let (l, r) = text.split_once("->").expect("schema needs `->`");
        let lhs = PatternParser::new(l).parse_all();
        let rhs = PatternParser::new(r).parse_all();
        let schema = RuleSchema {
            name: name.into(),
            lhs,
            rhs,
            side,
        };
        schema.check_variables();
        schema
    }

    fn check_variables(&self) {
        let mut bound = Vec::new();
        collect_vars(&self.lhs, &mut bound);
        let mut used = Vec::new();
        collect_vars(&self.rhs, &mut used);
        for v in used {
            assert!(
                bound.contains(&v),
                "schema {}: ?{v} unbound on the left",
                self.name
            );
        }
    }

    pub fn apply_at(
        &self,
        t: &Term,
        p: &Position,
        params: &SchemaParams,
        prec: &Precedence,
    ) -> Result<Term, SchemaError> {
        let sub = t.subterm_at(p)?;
        let mut b = Bindings::default();
        let mut splits = params.splits.iter().copied();
        match_pattern(&self.lhs, sub, &mut b, &mut splits)?;
        if splits.next().is_some() {
            return Err(SchemaError::ParamsOutOfRange(
                "unused split parameter".into(),
            ));
        }
        for (k, s) in &params.symbols {
            if b.symbols.contains_key(k) {
                return Err(SchemaError::ParamsOutOfRange(format!(
                    "symbol ${k} is matched, not chosen"
                )));
            }
            b.symbols.insert(k.clone(), s.clone());
        }
        for (k, n) in &params.energies {
            b.energies.entry(k.clone()).or_insert(*n);
        }
        for cond in &self.side {
            check_side(cond, &b, prec)?;
        }
        let mut out = instantiate(&self.rhs, &b, params)?;
        if out.len() != 1 {
            return Err(SchemaError::ParamsOutOfRange(
                "right-hand side must be a single term".into(),
            ));
        }
        Ok(t.replace_at(p, out.pop().expect("one term"))?)
    }
}

/// Applies `schema` at position `p` of `t`.
pub fn apply_schema_at(
    t: &Term,
    p: &Position,
    schema: &RuleSchema,
    params: &SchemaParams,
    prec: &Precedence,
) -> Result<Term, SchemaError> {
    schema.apply_at(t, p, params, prec)
}

fn collect_vars(p: &Pattern, out: &mut Vec<String>) {
    match p {
        Pattern::Var(v) | Pattern::Vector(v) => out.push(v.clone()),
        Pattern::Node { children, .. } => children.iter().for_each(|c| collect_vars(c, out)),
        Pattern::Repeat { body, .. } => collect_vars(body, out),
    }
}

fn check_side(cond: &SideCondition, b: &Bindings, prec: &Precedence) -> Result<(), SchemaError> {
    let sym = |v: &String| {
        b.symbols
            .get(v)
            .ok_or_else(|| SchemaError::ParamsOutOfRange(format!("no symbol chosen for ${v}")))
    };
    match cond {
        SideCondition::Greater(f, g) => {
            let (f, g) = (sym(f)?, sym(g)?);
            if prec.greater(f, g) {
                Ok(())
            } else {
                Err(SchemaError::ParamsOutOfRange(format!(
                    "{f} > {g} does not hold"
                )))
            }
        }
        SideCondition::Natural(k) => {
            let k = sym(k)?;
            if k.as_natural().is_some() {
                Ok(())
            } else {
                Err(SchemaError::ParamsOutOfRange(format!(
                    "{k} is not a natural number"
                )))
            }
        }
    }
}

fn no_match(what: impl fmt::Display) -> SchemaError {
    SchemaError::NoMatch(what.to_string())
}

fn match_pattern(
    pat: &Pattern,
    t: &Term,
    b: &mut Bindings,
    splits: &mut impl Iterator<Item = usize>,
) -> Result<(), SchemaError> {
    match pat {
        Pattern::Var(v) => match b.terms.get(v) {
            Some(prev) if prev != t => {
                Err(no_match(format!("?{v} bound twice to different terms")))
            }
            Some(_) => Ok(()),
            None => {
                b.terms.insert(v.clone(), t.clone());
                Ok(())
            }
        },
        Pattern::Vector(_) | Pattern::Repeat { .. } => {
            Err(no_match("sequence pattern outside an argument list"))
        }
        Pattern::Node {
            head,
            marker,
            children,
        } => {
            let node = t
                .as_node()
                .ok_or_else(|| no_match(format!("{t} is a variable")))?;
            match head {
                HeadPat::Fixed(s) if *s != node.symbol => {
                    return Err(no_match(format!("expected {s}, found {}", node.symbol)))
                }
                HeadPat::Fixed(_) => {}
                HeadPat::Var(v) => match b.symbols.get(v) {
                    Some(s) if *s != node.symbol => {
                        return Err(no_match(format!(
                            "${v} bound to {s}, found {}",
                            node.symbol
                        )))
                    }
                    Some(_) => {}
                    None => {
                        b.symbols.insert(v.clone(), node.symbol.clone());
                    }
                },
            }
            match (marker, node.marker) {
                (MarkerPat::Exactly(m), actual) if *m == actual => {}
                (MarkerPat::Energy(n), Marker::Energy(e)) => bind_energy(b, n, e)?,
                (MarkerPat::EnergySucc(n), Marker::Energy(e)) if e >= 1 => {
                    bind_energy(b, n, e - 1)?
                }
                _ => return Err(no_match(format!("marker mismatch at {}", node.symbol))),
            }
            match_children(children, &node.children, b, splits)
        }
    }
}

fn bind_energy(b: &mut Bindings, n: &str, e: u32) -> Result<(), SchemaError> {
    match b.energies.get(n) {
        Some(prev) if *prev != e => Err(no_match("energy bound twice")),
        _ => {
            b.energies.insert(n.into(), e);
            Ok(())
        }
    }
}

fn match_children(
    pats: &[Pattern],
    ts: &[Term],
    b: &mut Bindings,
    splits: &mut impl Iterator<Item = usize>,
) -> Result<(), SchemaError> {
    let vectors = pats
        .iter()
        .filter(|p| matches!(p, Pattern::Vector(_)))
        .count();
    let fixed = pats.len() - vectors;
    if ts.len() < fixed || (vectors == 0 && ts.len() != fixed) {
        return Err(no_match(format!(
            "expected {fixed} arguments, found {}",
            ts.len()
        )));
    }
    let mut free = ts.len() - fixed;
    let mut lengths = Vec::with_capacity(vectors);
    for _ in 1..vectors {
        let n = splits
            .next()
            .ok_or_else(|| SchemaError::ParamsOutOfRange("missing split parameter".into()))?;
        if n > free {
            return Err(SchemaError::ParamsOutOfRange(format!(
                "split {n} exceeds {free} arguments"
            )));
        }
        free -= n;
        lengths.push(n);
    }
    if vectors > 0 {
        lengths.push(free);
    }
    let mut lengths = lengths.into_iter();
    let mut i = 0;
    for pat in pats {
        if let Pattern::Vector(v) = pat {
            let n = lengths.next().expect("one length per vector");
            let seq = ts[i..i + n].to_vec();
            match b.vectors.get(v) {
                Some(prev) if *prev != seq => return Err(no_match(format!("?{v}.. bound twice"))),
                _ => {
                    b.vectors.insert(v.clone(), seq);
                }
            }
            i += n;
        } else {
            match_pattern(pat, &ts[i], b, splits)?;
            i += 1;
        }
    }
    Ok(())
}

fn instantiate(
    pat: &Pattern,
    b: &Bindings,
    params: &SchemaParams,
) -> Result<Vec<Term>, SchemaError> {
    let unbound = |what: String| SchemaError::ParamsOutOfRange(format!("{what} is unbound"));
    match pat {
        Pattern::Var(v) => Ok(vec![b
            .terms
            .get(v)
            .cloned()
            .ok_or_else(|| unbound(format!("?{v}")))?]),
        Pattern::Vector(v) => b
            .vectors
            .get(v)
            .cloned()
            .ok_or_else(|| unbound(format!("?{v}.."))),
        Pattern::Repeat { body, count } => {
            let k = *params
                .counts
                .get(count)
                .ok_or_else(|| unbound(format!("count {count}")))?;
            let one = instantiate(body, b, params)?;
            Ok((0..k).flat_map(|_| one.iter().cloned()).collect())
        }
        Pattern::Node {
            head,
            marker,
            children,
        } => {
            let symbol = match head {
                HeadPat::Fixed(s) => s.clone(),
                HeadPat::Var(v) => b
                    .symbols
                    .get(v)
                    .cloned()
                    .ok_or_else(|| unbound(format!("${v}")))?,
            };
            let marker = match marker {
                MarkerPat::Exactly(m) => *m,
                MarkerPat::Energy(n) => Marker::Energy(
                    *b.energies
                        .get(n)
                        .ok_or_else(|| unbound(format!("energy {n}")))?,
                ),
                MarkerPat::EnergySucc(n) => {
                    let e = *b
                        .energies
                        .get(n)
                        .ok_or_else(|| unbound(format!("energy {n}")))?;
                    Marker::Energy(e + 1)
                }
            };
            let mut kids = Vec::new();
            for c in children {
                kids.extend(instantiate(c, b, params)?);
            }
            Ok(vec![Term::Node(Node {
                symbol,
                marker,
                children: kids,
            })])
        }
    }
}

struct PatternParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> PatternParser<'a> {
    fn new(s: &'a str) -> Self {
        PatternParser {
            src: s.as_bytes(),
            pos: 0,
        }
    }

    fn parse_all(mut self) -> Pattern {
        let p = self.pattern();
        self.ws();
        assert_eq!(self.pos, self.src.len(), "trailing schema text");
        p
    }

    fn ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> String {
        self.ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        assert!(
            start < self.pos,
            "schema identifier expected at {}",
            self.pos
        );
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn pattern(&mut self) -> Pattern {
        if self.eat(b'[') {
            let body = self.pattern();
            assert!(self.eat(b';'), "expected ';' in repeat");
            let count = self.ident();
            assert!(self.eat(b']'), "expected ']'");
            return Pattern::Repeat {
                body: Box::new(body),
                count,
            };
        }
        if self.eat(b'?') {
            let name = self.ident();
            if self.src[self.pos..].starts_with(b"..") {
                self.pos += 2;
                return Pattern::Vector(name);
            }
            return Pattern::Var(name);
        }
        let head = if self.eat(b'$') {
            HeadPat::Var(self.ident())
        } else {
            HeadPat::Fixed(Symbol::new(self.ident()))
        };
        let marker = if self.eat(b'*') {
            MarkerPat::Exactly(Marker::Star)
        } else if self.eat(b'_') {
            MarkerPat::Exactly(Marker::Underline)
        } else if self.eat(b'^') {
            assert!(self.eat(b'$'), "energy must be a variable");
            let n = self.ident();
            if self.eat(b'+') {
                assert_eq!(self.ident(), "1");
                MarkerPat::EnergySucc(n)
            } else {
                MarkerPat::Energy(n)
            }
        } else {
            MarkerPat::Exactly(Marker::None)
        };
        let mut children = Vec::new();
        if self.eat(b'(') && !self.eat(b')') {
            loop {
                children.push(self.pattern());
                if self.eat(b')') {
                    break;
                }
                assert!(self.eat(b','), "expected ',' in schema");
            }
        }
        Pattern::Node {
            head,
            marker,
            children,
        }
    }
}
