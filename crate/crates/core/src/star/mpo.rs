//! The multiset path order induced by a precedence, on trees.
//!
//! `s = f(s1..sm) > t` holds iff
//! (a) some `si >= t`, or
//! (b) `t = g(t1..tn)` with `f > g` and `s > tj` for all `j`, or
//! (c) `t = f(t1..tn)` and `{s1..sm}` strictly dominates `{t1..tn}`.
//!
//! Equality is tree equality. A variable `x` is below `s` iff it occurs
//! properly in `s`. In case (c) the children removed from the left multiset
//! must not be variables, since the star rules cannot discard a variable
//! child while keeping its parent.

use std::collections::HashMap;

use crate::precedence::Precedence;
use crate::term::Term;
use crate::tree::canonicalize;

pub fn mpo_greater(s: &Term, t: &Term, prec: &Precedence) -> bool {
    Mpo::new(prec).greater(&canonicalize(s), &canonicalize(t))
}

/// `s > t` or `s` and `t` denote the same tree.
pub fn mpo_greater_eq(s: &Term, t: &Term, prec: &Precedence) -> bool {
    let (s, t) = (canonicalize(s), canonicalize(t));
    s == t || Mpo::new(prec).greater(&s, &t)
}

/// Which clause of the order justifies `s > t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Reason {
    /// Child `i` (0-based) is equal to `t`.
    SubtermEq(usize),
    /// Child `i` (0-based) is greater than `t`.
    Subterm(usize),
    /// The head of `t` is below the head of `s`.
    Precedence,
    /// Same heads; each entry pairs a child of `s` outside the common part
    /// with the indices of `t`'s children charged to it.
    Multiset { removed: Vec<(usize, Vec<usize>)> },
}

/// Memoizing decision procedure over canonical terms.
pub(crate) struct Mpo<'a> {
    prec: &'a Precedence,
    memo: HashMap<(Term, Term), bool>,
}

impl<'a> Mpo<'a> {
    pub(crate) fn new(prec: &'a Precedence) -> Mpo<'a> {
        Mpo {
            prec,
            memo: HashMap::new(),
        }
    }

    /// Expects canonical arguments.
    pub(crate) fn greater(&mut self, s: &Term, t: &Term) -> bool {
        if let Some(&b) = self.memo.get(&(s.clone(), t.clone())) {
            return b;
        }
        let b = self.reason(s, t).is_some();
        self.memo.insert((s.clone(), t.clone()), b);
        b
    }

    /// The first applicable clause, preferring (a) over (b) over (c) and the
    /// leftmost child within (a). Arguments must be canonical.
    pub(crate) fn reason(&mut self, s: &Term, t: &Term) -> Option<Reason> {
        let sn = s.as_node()?;
        if let Term::Var(x) = t {
            // reached only through clause (a) below
            if !s.contains_var(x) {
                return None;
            }
        }
        for (i, si) in sn.children.iter().enumerate() {
            if si == t {
                return Some(Reason::SubtermEq(i));
            }
            if self.greater(si, t) {
                return Some(Reason::Subterm(i));
            }
        }
        let tn = t.as_node()?;
        if self.prec.greater(&sn.symbol, &tn.symbol) {
            if tn.children.iter().all(|tj| self.greater(s, tj)) {
                return Some(Reason::Precedence);
            }
            return None;
        }
        if sn.symbol != tn.symbol {
            return None;
        }
        self.multiset(&sn.children, &tn.children)
            .map(|removed| Reason::Multiset { removed })
    }

    /// Strict multiset dominance of `ss` over `ts`. Returns, for every child
    /// of `ss` outside the common part, the children of `ts` it is charged with.
    fn multiset(&mut self, ss: &[Term], ts: &[Term]) -> Option<Vec<(usize, Vec<usize>)>> {
        let mut used = vec![false; ss.len()];
        let mut extra = Vec::new();
        for (j, tj) in ts.iter().enumerate() {
            match (0..ss.len()).find(|&i| !used[i] && ss[i] == *tj) {
                Some(i) => used[i] = true,
                None => extra.push(j),
            }
        }
        let removed: Vec<usize> = (0..ss.len()).filter(|&i| !used[i]).collect();
        if removed.is_empty() || removed.iter().any(|&i| ss[i].is_var()) {
            return None;
        }
        let mut charge: Vec<(usize, Vec<usize>)> =
            removed.iter().map(|&i| (i, Vec::new())).collect();
        for j in extra {
            let slot = charge
                .iter()
                .position(|(i, _)| self.greater(&ss[*i], &ts[j]))?;
            charge[slot].1.push(j);
        }
        Some(charge)
    }
}
