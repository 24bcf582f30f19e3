//! Unranked terms, markers, positions and substitutions.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::TermError;

/// Reserved name for the Hydra body (the root of KP and Buchholz Hydras).
pub const DAGGER: &str = "dagger";
/// Reserved name for the limit label of Buchholz Hydras.
pub const OMEGA: &str = "omega";
/// Reserved name for the auxiliary bottom label used by garbage collection.
pub const BOT: &str = "bot";

/// A function symbol of the unranked signature.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: impl AsRef<str>) -> Symbol {
        Symbol(Arc::from(name.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The numeric value of a label such as `7`, if it is one.
    pub fn as_natural(&self) -> Option<u64> {
        if self.0.is_empty() || !self.0.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        self.0.parse().ok()
    }

    pub fn natural(n: u64) -> Symbol {
        Symbol::new(n.to_string())
    }

    pub fn dagger() -> Symbol {
        Symbol::new(DAGGER)
    }

    pub fn omega() -> Symbol {
        Symbol::new(OMEGA)
    }

    pub fn bot() -> Symbol {
        Symbol::new(BOT)
    }

    pub fn is_reserved(&self) -> bool {
        matches!(self.as_str(), DAGGER | OMEGA | BOT)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Symbol {
        Symbol::new(s)
    }
}

/// Per-node annotation: the star of the star game, a natural-number energy,
/// or the underline used by the Star Hydra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Marker {
    #[default]
    None,
    Star,
    Energy(u32),
    Underline,
}

impl Marker {
    pub fn is_none(self) -> bool {
        self == Marker::None
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Arc<str>),
    Node(Node),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Node {
    pub symbol: Symbol,
    pub marker: Marker,
    pub children: Vec<Term>,
}

impl Term {
    pub fn var(name: impl AsRef<str>) -> Term {
        Term::Var(Arc::from(name.as_ref()))
    }

    pub fn leaf(symbol: impl Into<Symbol>) -> Term {
        Term::app(symbol, Vec::new())
    }

    pub fn app(symbol: impl Into<Symbol>, children: Vec<Term>) -> Term {
        Term::Node(Node {
            symbol: symbol.into(),
            marker: Marker::None,
            children,
        })
    }

    pub fn marked(symbol: impl Into<Symbol>, marker: Marker, children: Vec<Term>) -> Term {
        Term::Node(Node {
            symbol: symbol.into(),
            marker,
            children,
        })
    }

    pub fn as_node(&self) -> Option<&Node> {
        match self {
            Term::Node(n) => Some(n),
            Term::Var(_) => None,
        }
    }

    pub fn as_node_mut(&mut self) -> Option<&mut Node> {
        match self {
            Term::Node(n) => Some(n),
            Term::Var(_) => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn symbol(&self) -> Option<&Symbol> {
        self.as_node().map(|n| &n.symbol)
    }

    pub fn marker(&self) -> Marker {
        self.as_node().map_or(Marker::None, |n| n.marker)
    }

    pub fn children(&self) -> &[Term] {
        match self {
            Term::Node(n) => &n.children,
            Term::Var(_) => &[],
        }
    }

    /// Copy of this term with the root marker replaced. Variables are returned unchanged.
    pub fn with_marker(&self, marker: Marker) -> Term {
        match self {
            Term::Node(n) => Term::Node(Node {
                symbol: n.symbol.clone(),
                marker,
                children: n.children.clone(),
            }),
            Term::Var(_) => self.clone(),
        }
    }

    /// Number of nodes (variables count as nodes).
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(Term::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(Term::depth).max().unwrap_or(0)
    }

    /// True when no node carries a marker.
    pub fn is_unmarked(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::Node(n) => n.marker.is_none() && n.children.iter().all(Term::is_unmarked),
        }
    }

    pub fn count_markers(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::Node(n) => {
                usize::from(!n.marker.is_none())
                    + n.children.iter().map(Term::count_markers).sum::<usize>()
            }
        }
    }

    /// Removes every marker.
    pub fn strip_markers(&self) -> Term {
        self.map_markers(&|_| Marker::None)
    }

    pub fn map_markers(&self, f: &dyn Fn(Marker) -> Marker) -> Term {
        match self {
            Term::Var(_) => self.clone(),
            Term::Node(n) => Term::Node(Node {
                symbol: n.symbol.clone(),
                marker: f(n.marker),
                children: n.children.iter().map(|c| c.map_markers(f)).collect(),
            }),
        }
    }

    /// Variables in left-to-right order of first occurrence.
    pub fn vars(&self) -> Vec<Arc<str>> {
        let mut out: Vec<Arc<str>> = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Arc<str>>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Node(n) => n.children.iter().for_each(|c| c.collect_vars(out)),
        }
    }

    pub fn contains_var(&self, name: &str) -> bool {
        match self {
            Term::Var(v) => &**v == name,
            Term::Node(n) => n.children.iter().any(|c| c.contains_var(name)),
        }
    }

    /// All symbols occurring in the term, deduplicated and sorted.
    pub fn symbols(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.visit(&mut |t| {
            if let Some(s) = t.symbol() {
                out.push(s.clone());
            }
        });
        out.sort();
        out.dedup();
        out
    }

    /// Pre-order visit.
    pub fn visit(&self, f: &mut dyn FnMut(&Term)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// All positions in pre-order (root first, children left to right).
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect_positions(&mut path, &mut out);
        out
    }

    fn collect_positions(&self, path: &mut Vec<usize>, out: &mut Vec<Position>) {
        out.push(Position(path.clone()));
        for (i, c) in self.children().iter().enumerate() {
            path.push(i + 1);
            c.collect_positions(path, out);
            path.pop();
        }
    }

    pub fn subterm_at(&self, p: &Position) -> Result<&Term, TermError> {
        let mut cur = self;
        for &i in &p.0 {
            cur = i
                .checked_sub(1)
                .and_then(|j| cur.children().get(j))
                .ok_or_else(|| TermError::InvalidPosition(p.clone()))?;
        }
        Ok(cur)
    }

    pub fn subterm_at_mut(&mut self, p: &Position) -> Result<&mut Term, TermError> {
        let mut cur = self;
        for &i in &p.0 {
            let node = match cur {
                Term::Node(n) => n,
                Term::Var(_) => return Err(TermError::InvalidPosition(p.clone())),
            };
            cur = i
                .checked_sub(1)
                .and_then(|j| node.children.get_mut(j))
                .ok_or_else(|| TermError::InvalidPosition(p.clone()))?;
        }
        Ok(cur)
    }

    /// The context fill `C[s]` where `C` is `self` with a hole at `p`.
    pub fn replace_at(&self, p: &Position, s: Term) -> Result<Term, TermError> {
        let mut out = self.clone();
        *out.subterm_at_mut(p)? = s;
        Ok(out)
    }
}

// Canonical total order: variables before nodes; nodes by (marker, symbol,
// arity, children lexicographically).
impl Ord for Term {
    fn cmp(&self, other: &Term) -> Ordering {
        match (self, other) {
            (Term::Var(a), Term::Var(b)) => a.cmp(b),
            (Term::Var(_), Term::Node(_)) => Ordering::Less,
            (Term::Node(_), Term::Var(_)) => Ordering::Greater,
            (Term::Node(a), Term::Node(b)) => a
                .marker
                .cmp(&b.marker)
                .then_with(|| a.symbol.cmp(&b.symbol))
                .then_with(|| a.children.len().cmp(&b.children.len()))
                .then_with(|| a.children.cmp(&b.children)),
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Term) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Node(n) => {
                write!(f, "{}", n.symbol)?;
                match n.marker {
                    Marker::None => {}
                    Marker::Star => f.write_str("*")?,
                    Marker::Energy(e) => write!(f, "^{e}")?,
                    Marker::Underline => f.write_str("_")?,
                }
                if !n.children.is_empty() {
                    f.write_str("(")?;
                    for (i, c) in n.children.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{c}")?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A path of 1-based child indices; the empty path is the root.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, i: usize) -> Position {
        let mut v = self.0.clone();
        v.push(i);
        Position(v)
    }

    pub fn parent(&self) -> Option<Position> {
        if self.0.is_empty() {
            None
        } else {
            Some(Position(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// Last child index, `None` at the root.
    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn concat(&self, other: &Position) -> Position {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Position(v)
    }

    /// Greatest common ancestor (the supremum of two nodes towards the root).
    pub fn meet(&self, other: &Position) -> Position {
        Position(
            self.0
                .iter()
                .zip(&other.0)
                .take_while(|(a, b)| a == b)
                .map(|(a, _)| *a)
                .collect(),
        )
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl From<Vec<usize>> for Position {
    fn from(v: Vec<usize>) -> Position {
        Position(v)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution(BTreeMap<Arc<str>, Term>);

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn insert(&mut self, var: impl AsRef<str>, t: Term) {
        self.0.insert(Arc::from(var.as_ref()), t);
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.0.get(var)
    }

    pub fn apply(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.0.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Node(n) => Term::Node(Node {
                symbol: n.symbol.clone(),
                marker: n.marker,
                children: n.children.iter().map(|c| self.apply(c)).collect(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn subterm_at_follows_child_indices() {
        let term = t("3(5,7(9))");
        assert_eq!(term.subterm_at(&Position::root()).unwrap(), &term);
        assert_eq!(term.subterm_at(&Position(vec![2, 1])).unwrap(), &t("9"));
        assert!(matches!(
            t("f(a)").subterm_at(&Position(vec![2])),
            Err(TermError::InvalidPosition(_))
        ));
        assert!(t("f(a)").subterm_at(&Position(vec![0])).is_err());
    }

    #[test]
    fn replace_at_fills_context() {
        assert_eq!(
            t("f(a,b)").replace_at(&Position(vec![1]), t("c")).unwrap(),
            t("f(c,b)")
        );
        assert_eq!(
            t("?x").replace_at(&Position::root(), t("g")).unwrap(),
            t("g")
        );
        assert!(t("?x").replace_at(&Position(vec![1]), t("g")).is_err());
    }

    #[test]
    fn positions_are_preorder() {
        let ps = t("f(a,g(b))").positions();
        let shown: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
        assert_eq!(shown, ["ε", "1", "2", "2.1"]);
    }

    #[test]
    fn substitution_replaces_only_mapped_vars() {
        let mut sigma = Substitution::new();
        sigma.insert("x", t("a"));
        assert_eq!(sigma.apply(&t("f(?x,?y)")), t("f(a,?y)"));
    }

    #[test]
    fn meet_is_common_prefix() {
        let a = Position(vec![1, 2, 3]);
        let b = Position(vec![1, 2, 1]);
        assert_eq!(a.meet(&b), Position(vec![1, 2]));
        assert_eq!(a.meet(&a), a);
    }

    #[test]
    fn naturals_are_recognised() {
        assert_eq!(Symbol::new("17").as_natural(), Some(17));
        assert_eq!(Symbol::new("omega").as_natural(), None);
        assert_eq!(Symbol::new("1a").as_natural(), None);
    }
}
