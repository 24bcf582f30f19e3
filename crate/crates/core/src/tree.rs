//! Trees as terms modulo permutation of arguments.

use std::collections::{BTreeSet, VecDeque};

use crate::term::{Node, Position, Symbol, Term};

/// The canonical representative of the tree denoted by `t`: children are
/// recursively canonicalized and sorted by the canonical term order.
pub fn canonicalize(t: &Term) -> Term {
    match t {
        Term::Var(_) => t.clone(),
        Term::Node(n) => {
            let mut children: Vec<Term> = n.children.iter().map(canonicalize).collect();
            children.sort();
            Term::Node(Node {
                symbol: n.symbol.clone(),
                marker: n.marker,
                children,
            })
        }
    }
}

pub fn is_canonical(t: &Term) -> bool {
    let cs = t.children();
    cs.windows(2).all(|w| w[0] <= w[1]) && cs.iter().all(is_canonical)
}

/// `s ≃ t`: equal up to reordering of siblings.
pub fn tree_equal(s: &Term, t: &Term) -> bool {
    s.size() == t.size() && canonicalize(s) == canonicalize(t)
}

/// One-step swaps of adjacent siblings anywhere in `t`.
pub fn swap_successors(t: &Term) -> Vec<Term> {
    let mut out = Vec::new();
    for p in t.positions() {
        let sub = t.subterm_at(&p).expect("own position");
        let Some(node) = sub.as_node() else { continue };
        for i in 0..node.children.len().saturating_sub(1) {
            let mut n = node.clone();
            n.children.swap(i, i + 1);
            out.push(t.replace_at(&p, Term::Node(n)).expect("own position"));
        }
    }
    out
}

/// All terms reachable from `t` by swap steps (including `t`). Exponential;
/// meant for small test instances.
pub fn swap_closure(t: &Term) -> BTreeSet<Term> {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([t.clone()]);
    seen.insert(t.clone());
    while let Some(u) = queue.pop_front() {
        for v in swap_successors(&u) {
            if seen.insert(v.clone()) {
                queue.push_back(v);
            }
        }
    }
    seen
}

/// One canonical representative per tree with at most `max_nodes` nodes over
/// `signature`, ordered by size and then canonically.
pub fn enumerate_trees(signature: &[Symbol], max_nodes: usize) -> Vec<Term> {
    let mut labels: Vec<Symbol> = signature.to_vec();
    labels.sort();
    labels.dedup();
    // by_size[k]: canonical trees of exactly k nodes, sorted
    let mut by_size: Vec<Vec<Term>> = vec![Vec::new()];
    for n in 1..=max_nodes {
        let mut pool: Vec<(usize, Term)> = Vec::new();
        for (k, ts) in by_size.iter().enumerate().skip(1) {
            pool.extend(ts.iter().map(|t| (k, t.clone())));
        }
        pool.sort_by(|a, b| a.1.cmp(&b.1));
        let mut forests = Vec::new();
        forests_of_size(&pool, 0, n - 1, &mut Vec::new(), &mut forests);
        let mut level = Vec::new();
        for f in &labels {
            for children in &forests {
                level.push(Term::app(f.clone(), children.clone()));
            }
        }
        level.sort();
        by_size.push(level);
    }
    by_size.into_iter().flatten().collect()
}

fn forests_of_size(
    pool: &[(usize, Term)],
    from: usize,
    remaining: usize,
    acc: &mut Vec<Term>,
    out: &mut Vec<Vec<Term>>,
) {
    if remaining == 0 {
        out.push(acc.clone());
        return;
    }
    for i in from..pool.len() {
        let (k, t) = &pool[i];
        if *k <= remaining {
            acc.push(t.clone());
            forests_of_size(pool, i, remaining - k, acc, out);
            acc.pop();
        }
    }
}

/// Maps a position of `t` to the position of the same node in `canonicalize(t)`.
pub fn canonical_position(t: &Term, p: &Position) -> Position {
    let mut out = Vec::new();
    let mut cur = t.clone();
    for &i in &p.0 {
        let children: Vec<Term> = cur.children().iter().map(canonicalize).collect();
        let mine = children[i - 1].clone();
        // rank among equal siblings is preserved by a stable sort
        let before = children[..i - 1].iter().filter(|c| **c <= mine).count();
        let after = children[i..].iter().filter(|c| **c < mine).count();
        out.push(before + after + 1);
        cur = cur.children()[i - 1].clone();
    }
    Position(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn permuted_trees_canonicalize_identically() {
        let a = t("3(8(0(5,1)),5,7(9))");
        let b = t("3(5,7(9),8(0(1,5)))");
        assert_eq!(canonicalize(&a), canonicalize(&b));
        assert!(tree_equal(&a, &b));
        assert_eq!(canonicalize(&t("f(b,a)")), t("f(a,b)"));
    }

    #[test]
    fn canonicalize_is_idempotent() {
        for s in ["f(b,a)", "3(8(0(5,1)),5,7(9))", "f*(?y,a^2,?x)", "a"] {
            let c = canonicalize(&t(s));
            assert_eq!(canonicalize(&c), c);
            assert!(is_canonical(&c));
        }
    }

    #[test]
    fn tree_equal_distinguishes_shapes() {
        assert!(tree_equal(&t("f(a,b)"), &t("f(b,a)")));
        assert!(!tree_equal(&t("1(0,0)"), &t("1(0(0))")));
        assert!(!tree_equal(&t("f*(a)"), &t("f(a)")));
    }

    #[test]
    fn enumeration_small_cases() {
        let a = [Symbol::new("a")];
        assert_eq!(enumerate_trees(&a, 1), vec![t("a")]);
        let three: Vec<String> = enumerate_trees(&a, 3)
            .iter()
            .map(|x| x.to_string())
            .collect();
        assert_eq!(three, ["a", "a(a)", "a(a(a))", "a(a,a)"]);
        let ab = [Symbol::new("b"), Symbol::new("a")];
        assert_eq!(enumerate_trees(&ab, 1), vec![t("a"), t("b")]);
    }

    #[test]
    fn unordered_tree_counts_match_brute_force() {
        // Brute force: all ordered terms over {a} up to 6 nodes, quotiented by canonicalize.
        fn ordered(n: usize) -> Vec<Term> {
            if n == 1 {
                return vec![t("a")];
            }
            let mut out = Vec::new();
            for forest in ordered_forests(n - 1) {
                out.push(Term::app("a", forest));
            }
            out
        }
        fn ordered_forests(n: usize) -> Vec<Vec<Term>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for k in 1..=n {
                for first in ordered(k) {
                    for mut rest in ordered_forests(n - k) {
                        rest.insert(0, first.clone());
                        out.push(rest);
                    }
                }
            }
            out
        }
        let a = [Symbol::new("a")];
        let all = enumerate_trees(&a, 6);
        for n in 1..=6 {
            let classes: BTreeSet<Term> = ordered(n).iter().map(canonicalize).collect();
            let ours = all.iter().filter(|x| x.size() == n).count();
            assert_eq!(ours, classes.len(), "size {n}");
        }
        // 1, 1, 2, 4, 9, 20 unordered rooted trees
        let counts: Vec<usize> = (1..=6)
            .map(|n| all.iter().filter(|x| x.size() == n).count())
            .collect();
        assert_eq!(counts, [1, 1, 2, 4, 9, 20]);
    }

    #[test]
    fn enumerated_trees_are_canonical_and_distinct() {
        let sig = [Symbol::new("0"), Symbol::new("1")];
        let all = enumerate_trees(&sig, 4);
        let set: BTreeSet<_> = all.iter().cloned().collect();
        assert_eq!(set.len(), all.len());
        assert!(all.iter().all(|x| canonicalize(x) == *x));
    }

    #[test]
    fn tree_equal_coincides_with_swap_reachability() {
        let sig = [Symbol::new("0"), Symbol::new("1")];
        // freeze every enumerated tree into all of its orderings
        let reps = enumerate_trees(&sig, 4);
        let terms: Vec<Term> = reps.iter().flat_map(swap_closure).collect();
        for s in terms.iter().step_by(3) {
            let reach = swap_closure(s);
            for u in &terms {
                assert_eq!(tree_equal(s, u), reach.contains(u), "{s} vs {u}");
            }
        }
    }

    #[test]
    fn tree_equal_is_an_equivalence() {
        let sig = [Symbol::new("0"), Symbol::new("1")];
        let reps = enumerate_trees(&sig, 3);
        let terms: Vec<Term> = reps.iter().flat_map(swap_closure).collect();
        for a in &terms {
            assert!(tree_equal(a, a));
            for b in &terms {
                assert_eq!(tree_equal(a, b), tree_equal(b, a));
                if tree_equal(a, b) {
                    for c in &terms {
                        if tree_equal(b, c) {
                            assert!(tree_equal(a, c));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn canonical_position_tracks_nodes() {
        let term = t("f(c,b(x),b(a))");
        for p in term.positions() {
            let q = canonical_position(&term, &p);
            let c = canonicalize(&term);
            assert_eq!(
                canonicalize(term.subterm_at(&p).unwrap()),
                *c.subterm_at(&q).unwrap()
            );
        }
    }
}
