#![allow(dead_code)]

use rand::Rng;
use starpath::{parse_term, Symbol, Term};

pub fn t(s: &str) -> Term {
    parse_term(s).unwrap()
}

pub fn nats(n: u64) -> Vec<Symbol> {
    (0..n).map(Symbol::natural).collect()
}

/// A tree of `1..=max_nodes` nodes; each node after the first hangs below a
/// uniformly chosen earlier node.
pub fn random_tree<R: Rng>(rng: &mut R, labels: &[Symbol], max_nodes: usize) -> Term {
    let n = rng.gen_range(1..=max_nodes);
    let parents: Vec<usize> = (1..n).map(|i| rng.gen_range(0..i)).collect();
    let names: Vec<Symbol> = (0..n)
        .map(|_| labels[rng.gen_range(0..labels.len())].clone())
        .collect();
    build(0, &parents, &names)
}

/// As [`random_tree`] with the root labelled `root`.
pub fn random_tree_rooted<R: Rng>(
    rng: &mut R,
    root: Symbol,
    labels: &[Symbol],
    max_nodes: usize,
) -> Term {
    let n = rng.gen_range(1..=max_nodes);
    let parents: Vec<usize> = (1..n).map(|i| rng.gen_range(0..i)).collect();
    let mut names: Vec<Symbol> = (0..n)
        .map(|_| labels[rng.gen_range(0..labels.len())].clone())
        .collect();
    names[0] = root;
    build(0, &parents, &names)
}

fn build(i: usize, parents: &[usize], names: &[Symbol]) -> Term {
    let children = (1..names.len())
        .filter(|&j| parents[j - 1] == i)
        .map(|j| build(j, parents, names))
        .collect();
    Term::app(names[i].clone(), children)
}
