//! Homeomorphic embedding of trees.
//!
//! `s ≼ t` holds when the nodes of `s` map injectively into the nodes of `t`
//! so that meets (closest common ancestors) are preserved and labels only go
//! up in the label order. The decision procedure is the usual recursion:
//! `s ≼ t` iff `s` embeds into a child of `t`, or the root labels are ordered
//! and the children of `s` embed into pairwise distinct children of `t`,
//! the latter found by bipartite matching.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::TraceError;
use crate::precedence::Precedence;
use crate::term::{Position, Symbol, Term};
use crate::trace::{replay_step, validate_trace, Mode, Step, Trace};
use crate::tree::canonicalize;

/// A node map from `s` into `t`, keyed by positions of `s`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingWitness {
    #[serde(with = "pairs")]
    pub mapping: BTreeMap<Position, Position>,
}

mod pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::term::Position;

    pub fn serialize<S: Serializer>(
        m: &BTreeMap<Position, Position>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        m.iter().collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<Position, Position>, D::Error> {
        Ok(Vec::<(Position, Position)>::deserialize(d)?
            .into_iter()
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbeddingError {
    #[error("invalid witness: {0}")]
    WitnessInvalid(String),
    #[error("removing the variable child at {0} is not a star step")]
    VariableRemoval(Position),
    #[error("compiled trace does not validate: {0}")]
    Trace(#[from] TraceError),
}

/// The label of a node; variables are labelled by their name and only
/// compare with themselves.
fn label_le(a: &Term, b: &Term, order: &Precedence) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => x == y,
        (Term::Node(x), Term::Node(y)) => order.greater_eq(&y.symbol, &x.symbol),
        _ => false,
    }
}

/// Child matchings `(i, j)`: child `i` of one node maps below child `j`.
type ChildPairs = Vec<(usize, usize)>;

struct Embedder<'a> {
    s: &'a Term,
    t: &'a Term,
    order: &'a Precedence,
    memo: HashMap<(Position, Position), bool>,
    root_memo: HashMap<(Position, Position), Option<ChildPairs>>,
}

impl<'a> Embedder<'a> {
    fn new(s: &'a Term, t: &'a Term, order: &'a Precedence) -> Embedder<'a> {
        Embedder {
            s,
            t,
            order,
            memo: HashMap::new(),
            root_memo: HashMap::new(),
        }
    }

    fn sub_s(&self, a: &Position) -> &'a Term {
        self.s.subterm_at(a).expect("position of s")
    }

    fn sub_t(&self, b: &Position) -> &'a Term {
        self.t.subterm_at(b).expect("position of t")
    }

    /// `s|a ≼ t|b`.
    fn emb(&mut self, a: &Position, b: &Position) -> bool {
        if let Some(&r) = self.memo.get(&(a.clone(), b.clone())) {
            return r;
        }
        let r = self.root_emb(a, b).is_some()
            || (0..self.sub_t(b).children().len()).any(|j| self.emb(a, &b.child(j + 1)));
        self.memo.insert((a.clone(), b.clone()), r);
        r
    }

    /// `s|a ≼ t|b` with the root of `s|a` sent to the root of `t|b`; returns
    /// the matching of children as 0-based `(child of a, child of b)` pairs.
    fn root_emb(&mut self, a: &Position, b: &Position) -> Option<Vec<(usize, usize)>> {
        if let Some(r) = self.root_memo.get(&(a.clone(), b.clone())) {
            return r.clone();
        }
        let (sa, tb) = (self.sub_s(a), self.sub_t(b));
        let r = if !label_le(sa, tb, self.order) || sa.children().len() > tb.children().len() {
            None
        } else {
            let n = sa.children().len();
            let m = tb.children().len();
            let mut adj = vec![Vec::new(); n];
            for (i, row) in adj.iter_mut().enumerate() {
                for j in 0..m {
                    if self.emb(&a.child(i + 1), &b.child(j + 1)) {
                        row.push(j);
                    }
                }
            }
            bipartite_matching(&adj, m).map(|mate| mate.into_iter().enumerate().collect())
        };
        self.root_memo.insert((a.clone(), b.clone()), r.clone());
        r
    }

    fn witness(&mut self, a: &Position, b: &Position, out: &mut BTreeMap<Position, Position>) {
        if let Some(pairs) = self.root_emb(a, b) {
            out.insert(a.clone(), b.clone());
            for (i, j) in pairs {
                self.witness(&a.child(i + 1), &b.child(j + 1), out);
            }
            return;
        }
        let j = (0..self.sub_t(b).children().len())
            .find(|&j| self.emb(a, &b.child(j + 1)))
            .expect("witness is only built for embedded pairs");
        self.witness(a, &b.child(j + 1), out);
    }
}

/// Perfect matching of the left side into `m` right vertices (Kuhn's
/// augmenting paths). `mate[i]` is the right partner of left vertex `i`.
fn bipartite_matching(adj: &[Vec<usize>], m: usize) -> Option<Vec<usize>> {
    fn augment(
        i: usize,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        right: &mut [Option<usize>],
    ) -> bool {
        // prefer a free partner so that equal siblings keep their order
        if let Some(&j) = adj[i].iter().find(|&&j| right[j].is_none()) {
            seen[j] = true;
            right[j] = Some(i);
            return true;
        }
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                if right[j].is_none() || augment(right[j].expect("matched"), adj, seen, right) {
                    right[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    let mut right = vec![None; m];
    for i in 0..adj.len() {
        let mut seen = vec![false; m];
        if !augment(i, adj, &mut seen, &mut right) {
            return None;
        }
    }
    let mut mate = vec![0; adj.len()];
    for (j, i) in right.iter().enumerate() {
        if let Some(i) = i {
            mate[*i] = j;
        }
    }
    Some(mate)
}

/// A witness for `s ≼ t`, or `None` when `s` does not embed into `t`.
pub fn embeds(s: &Term, t: &Term, order: &Precedence) -> Option<EmbeddingWitness> {
    let mut e = Embedder::new(s, t, order);
    let root = Position::root();
    let b = t
        .positions()
        .into_iter()
        .find(|b| e.root_emb(&root, b).is_some())?;
    let mut mapping = BTreeMap::new();
    e.witness(&root, &b, &mut mapping);
    Some(EmbeddingWitness { mapping })
}

/// Checks a witness against the definition, independently of [`embeds`]:
/// total on the nodes of `s`, injective, meet preserving, label increasing.
pub fn validate_witness(
    s: &Term,
    t: &Term,
    w: &EmbeddingWitness,
    order: &Precedence,
) -> Result<(), String> {
    let nodes = s.positions();
    if nodes.len() != w.mapping.len() || nodes.iter().any(|p| !w.mapping.contains_key(p)) {
        return Err("mapping is not defined exactly on the nodes of s".into());
    }
    let mut image = HashSet::new();
    for (a, b) in &w.mapping {
        let tb = t
            .subterm_at(b)
            .map_err(|_| format!("{b} is not a node of t"))?;
        let sa = s.subterm_at(a).expect("checked");
        if !label_le(sa, tb, order) {
            return Err(format!("label at {a} is not below the label at {b}"));
        }
        if !image.insert(b.clone()) {
            return Err(format!("{b} is hit twice"));
        }
    }
    for (a1, b1) in &w.mapping {
        for (a2, b2) in &w.mapping {
            let meet = &w.mapping[&a1.meet(a2)];
            if *meet != b1.meet(b2) {
                return Err(format!("meet of {a1} and {a2} is not preserved"));
            }
        }
    }
    Ok(())
}

/// One-step reducts under removing a subtree, selecting a subtree, and
/// decreasing a label; canonical and without duplicates.
pub fn emb_successors(t: &Term, order: &Precedence) -> Vec<Term> {
    let mut out = Vec::new();
    for p in t.positions() {
        let sub = t.subterm_at(&p).expect("own position");
        let Some(node) = sub.as_node() else { continue };
        for i in 0..node.children.len() {
            let mut n = node.clone();
            let child = n.children.remove(i);
            out.push(t.replace_at(&p, Term::Node(n)).expect("own position"));
            out.push(t.replace_at(&p, child).expect("own position"));
        }
        for g in order.smaller_than(&node.symbol) {
            let mut n = node.clone();
            n.symbol = g.clone();
            out.push(t.replace_at(&p, Term::Node(n)).expect("own position"));
        }
    }
    let mut out: Vec<Term> = out.iter().map(canonicalize).collect();
    out.sort();
    out.dedup();
    out
}

/// Every tree reachable from `t` by embedding steps, `t` included, or `None`
/// once more than `max_states` trees have been seen.
pub fn emb_closure(t: &Term, order: &Precedence, max_states: usize) -> Option<HashSet<Term>> {
    let start = canonicalize(t);
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for v in emb_successors(&u, order) {
            if seen.insert(v.clone()) {
                if seen.len() > max_states {
                    return None;
                }
                queue.push_back(v);
            }
        }
    }
    Some(seen)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Agreement {
    Agree(bool),
    Disagree { embeds: bool, reachable: bool },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("closure exceeded {0} trees")]
pub struct BudgetExhausted(pub usize);

/// Whether `s` is reachable from `t` by embedding steps.
///
/// Label decreases commute with removing and selecting, and a chain of
/// decreases on one node can be taken in a single step. The search therefore
/// first closes `t` under removing and selecting, keeping trees no smaller
/// than `s`, and then closes each tree of the right size under decreases to
/// labels occurring in `s`.
pub fn emb_reachable(
    s: &Term,
    t: &Term,
    order: &Precedence,
    max_states: usize,
) -> Result<bool, BudgetExhausted> {
    let goal = canonicalize(s);
    let size = goal.size();
    let mut targets: Vec<Symbol> = goal.symbols();
    targets.sort();
    targets.dedup();
    let start = canonicalize(t);
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    let mut states = 0usize;
    let mut bump = || {
        states += 1;
        if states > max_states {
            Err(BudgetExhausted(max_states))
        } else {
            Ok(())
        }
    };
    while let Some(u) = queue.pop_front() {
        if u.size() == size {
            let mut inner = HashSet::from([u.clone()]);
            let mut iq = VecDeque::from([u]);
            while let Some(v) = iq.pop_front() {
                if v == goal {
                    return Ok(true);
                }
                for p in v.positions() {
                    let Some(node) = v.subterm_at(&p).expect("own position").as_node() else {
                        continue;
                    };
                    for g in targets.iter().filter(|g| order.greater(&node.symbol, g)) {
                        let mut n = node.clone();
                        n.symbol = g.clone();
                        let w =
                            canonicalize(&v.replace_at(&p, Term::Node(n)).expect("own position"));
                        if inner.insert(w.clone()) {
                            bump()?;
                            iq.push_back(w);
                        }
                    }
                }
            }
            continue;
        }
        for p in u.positions() {
            let Some(node) = u.subterm_at(&p).expect("own position").as_node() else {
                continue;
            };
            for i in 0..node.children.len() {
                let mut n = node.clone();
                let child = n.children.remove(i);
                for w in [Term::Node(n), child] {
                    let w = canonicalize(&u.replace_at(&p, w).expect("own position"));
                    if w.size() >= size && seen.insert(w.clone()) {
                        bump()?;
                        queue.push_back(w);
                    }
                }
            }
        }
    }
    Ok(false)
}

/// Compares [`embeds`] with reachability of `s` from `t` by embedding steps.
pub fn check_emb_equivalence(
    s: &Term,
    t: &Term,
    order: &Precedence,
    max_states: usize,
) -> Result<Agreement, BudgetExhausted> {
    let e = embeds(s, t, order).is_some();
    let r = emb_reachable(s, t, order, max_states)?;
    Ok(if e == r {
        Agreement::Agree(e)
    } else {
        Agreement::Disagree {
            embeds: e,
            reachable: r,
        }
    })
}

/// As [`check_emb_equivalence`] against a precomputed full closure of `t`.
pub fn agreement(s: &Term, t: &Term, order: &Precedence, closure: &HashSet<Term>) -> Agreement {
    let e = embeds(s, t, order).is_some();
    let r = closure.contains(&canonicalize(s));
    if e == r {
        Agreement::Agree(e)
    } else {
        Agreement::Disagree {
            embeds: e,
            reachable: r,
        }
    }
}

/// A star-mode trace `t ⤇* s'` with `s'` tree-equal to `s`, following the
/// witness: select down to the image of the root, then at each matched node
/// remove unused children, descend into the used ones, and lower the label.
pub fn compile_embedding_to_star(
    s: &Term,
    t: &Term,
    w: &EmbeddingWitness,
    order: &Precedence,
) -> Result<Trace, EmbeddingError> {
    validate_witness(s, t, w, order).map_err(EmbeddingError::WitnessInvalid)?;
    let mut c = Compiler {
        order,
        w,
        s,
        t,
        cur: t.clone(),
        steps: Vec::new(),
    };
    let b = w.mapping[&Position::root()].clone();
    c.walk(&Position::root(), &b.0);
    c.realize(&Position::root(), &Position::root(), &b)?;
    let trace = Trace {
        start: t.clone(),
        steps: c.steps,
        end: c.cur,
    };
    validate_trace(&trace, order, Mode::Star)?;
    Ok(trace)
}

struct Compiler<'a> {
    order: &'a Precedence,
    w: &'a EmbeddingWitness,
    s: &'a Term,
    t: &'a Term,
    cur: Term,
    steps: Vec<Step>,
}

impl Compiler<'_> {
    fn apply(&mut self, step: Step) {
        self.cur = replay_step(&self.cur, &step, self.order, Mode::Star)
            .unwrap_or_else(|e| panic!("compiled step {step} does not apply to {}: {e}", self.cur));
        self.steps.push(step);
    }

    /// Selects along `path` from the node at `at`.
    fn walk(&mut self, at: &Position, path: &[usize]) {
        for &i in path {
            self.apply(Step::put(at.clone()));
            self.apply(Step::select(at.clone(), i));
        }
    }

    /// `cur|at` is an untouched copy of `t|b`, and `a` maps to `b`.
    fn realize(&mut self, at: &Position, a: &Position, b: &Position) -> Result<(), EmbeddingError> {
        let sa = self.s.subterm_at(a).expect("witness domain");
        let tb = self.t.subterm_at(b).expect("witness image");
        // child j of b (1-based) -> (child i of a, remaining path)
        let mut used: BTreeMap<usize, (usize, Vec<usize>)> = BTreeMap::new();
        for i in 1..=sa.children().len() {
            let img = &self.w.mapping[&a.child(i)];
            let rest = &img.0[b.len()..];
            used.insert(rest[0], (i, rest[1..].to_vec()));
        }
        for j in (1..=tb.children().len()).rev() {
            if used.contains_key(&j) {
                continue;
            }
            if tb.children()[j - 1].is_var() {
                return Err(EmbeddingError::VariableRemoval(b.child(j)));
            }
            self.apply(Step::put(at.clone()));
            self.apply(Step::down(at.clone(), j, 0));
        }
        for (m, (j, (i, rest))) in used.into_iter().enumerate() {
            let here = at.child(m + 1);
            self.walk(&here, &rest);
            let mut img = b.child(j);
            img.0.extend_from_slice(&rest);
            self.realize(&here, &a.child(i), &img)?;
        }
        if let (Some(f), Some(g)) = (tb.symbol(), sa.symbol()) {
            if f != g {
                let n = sa.children().len();
                self.apply(Step::put(at.clone()));
                self.apply(Step::copy(at.clone(), g.clone(), n));
                for j in 1..=n {
                    self.apply(Step::select(at.child(j), j));
                }
            }
        }
        Ok(())
    }
}

/// The lexicographically least `(i, j)` with `i < j` and `seq[i] ≼ seq[j]`.
pub fn find_embedded_pair(seq: &[Term], order: &Precedence) -> Option<(usize, usize)> {
    (0..seq.len())
        .flat_map(|i| (i + 1..seq.len()).map(move |j| (i, j)))
        .find(|&(i, j)| embeds(&seq[i], &seq[j], order).is_some())
}

/// The word `w1 w2 .. wn` as the unary tree `w1(w2(..(wn)))`.
pub fn word_to_spine(word: &[Symbol]) -> Option<Term> {
    let (last, init) = word.split_last()?;
    Some(init.iter().rev().fold(Term::leaf(last.clone()), |acc, l| {
        Term::app(l.clone(), vec![acc])
    }))
}

/// `w ≤* v`: `w` is obtained from `v` by erasing letters and decreasing others.
pub fn subword_embeds(w: &[Symbol], v: &[Symbol], order: &Precedence) -> bool {
    // fits[i][j]: w[..i] embeds into v[..j]
    let mut fits = vec![vec![false; v.len() + 1]; w.len() + 1];
    fits[0].iter_mut().for_each(|x| *x = true);
    for i in 1..=w.len() {
        for j in 1..=v.len() {
            fits[i][j] =
                fits[i][j - 1] || (fits[i - 1][j - 1] && order.greater_eq(&v[j - 1], &w[i - 1]));
        }
    }
    fits[w.len()][v.len()]
}
