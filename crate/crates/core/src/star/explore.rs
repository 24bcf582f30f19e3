//! Exhaustive bounded exploration of the reduction graph on trees, with
//! cycle detection by strongly connected components.

use std::collections::HashMap;

use petgraph::algo::kosaraju_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::successors::{for_each_local_reduct, Energies};
use crate::precedence::Precedence;
#[cfg(test)]
use crate::term::Symbol;
use crate::term::{Node, Term};
use crate::tree::canonicalize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Game {
    Star,
    /// The star game with each put fused to the rule applied next at the
    /// same node. It has the same cycles through unmarked trees as `Star`
    /// and far fewer marked states.
    StarFusedPut,
    /// Energized stars; put assigns energies up to the bound.
    Omega {
        max_energy: u32,
    },
}

#[derive(Clone, Copy, Debug)]
pub struct ExploreConfig {
    pub game: Game,
    pub max_copies: usize,
    /// Reducts with more nodes are dropped.
    pub size_cap: usize,
    /// Exploration fails once this many distinct trees are found.
    pub max_states: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("exploration exceeded {0} states")]
pub struct ExplorationTooLarge(pub usize);

/// The reachable part of the reduction graph, one node per tree.
pub struct StateGraph {
    states: Vec<Term>,
    graph: DiGraph<(), ()>,
}

pub fn explore(
    starts: &[Term],
    prec: &Precedence,
    cfg: ExploreConfig,
) -> Result<StateGraph, ExplorationTooLarge> {
    let (energies, fuse) = match cfg.game {
        Game::Star => (Energies::Plain, false),
        Game::StarFusedPut => (Energies::Plain, true),
        Game::Omega { max_energy } => (Energies::Upto(max_energy), false),
    };
    let mut index: HashMap<Term, NodeIndex> = HashMap::new();
    let mut states = Vec::new();
    let mut graph = DiGraph::new();
    let mut intern =
        |t: Term, states: &mut Vec<Term>, graph: &mut DiGraph<(), ()>| -> (NodeIndex, bool) {
            if let Some(&i) = index.get(&t) {
                return (i, false);
            }
            let i = graph.add_node(());
            index.insert(t.clone(), i);
            states.push(t);
            (i, true)
        };
    let mut queue = Vec::new();
    for s in starts {
        let (i, fresh) = intern(canonicalize(s), &mut states, &mut graph);
        if fresh {
            queue.push(i);
        }
    }
    let mut reducts = Vec::new();
    while let Some(i) = queue.pop() {
        let t = states[i.index()].clone();
        let size = t.size();
        reducts.clear();
        for_each_local_reduct(&t, prec, cfg.max_copies, energies, fuse, &mut |p, s| {
            let old = t.subterm_at(p).expect("own position").size();
            if size - old + s.size() <= cfg.size_cap {
                reducts.push(replace_canonical(&t, &p.0, canonicalize(&s)));
            }
        });
        for r in reducts.drain(..) {
            let (j, fresh) = intern(r, &mut states, &mut graph);
            if fresh {
                if states.len() > cfg.max_states {
                    return Err(ExplorationTooLarge(cfg.max_states));
                }
                queue.push(j);
            }
            graph.update_edge(i, j, ());
        }
    }
    Ok(StateGraph { states, graph })
}

/// `t[s]_path` for canonical `t` and `s`, re-sorting only along the path.
fn replace_canonical(t: &Term, path: &[usize], s: Term) -> Term {
    let Some((&i, rest)) = path.split_first() else {
        return s;
    };
    let n = t.as_node().expect("paths run through nodes");
    let mut children = n.children.clone();
    children[i - 1] = replace_canonical(&n.children[i - 1], rest, s);
    children.sort();
    Term::Node(Node {
        symbol: n.symbol.clone(),
        marker: n.marker,
        children,
    })
}

impl StateGraph {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn contains(&self, t: &Term) -> bool {
        let c = canonicalize(t);
        self.states.contains(&c)
    }

    /// Components through which some reduction returns to its start.
    pub fn cyclic_components(&self) -> Vec<Vec<Term>> {
        kosaraju_scc(&self.graph)
            .into_iter()
            .filter(|c| c.len() > 1 || self.graph.contains_edge(c[0], c[0]))
            .map(|c| {
                c.into_iter()
                    .map(|i| self.states[i.index()].clone())
                    .collect()
            })
            .collect()
    }

    /// An unmarked tree lying on a cycle, if any.
    pub fn unmarked_on_cycle(&self) -> Option<Term> {
        self.cyclic_components()
            .into_iter()
            .flatten()
            .find(Term::is_unmarked)
    }

    /// Whether `t` lies on a cycle.
    pub fn on_cycle(&self, t: &Term) -> bool {
        let c = canonicalize(t);
        self.cyclic_components()
            .iter()
            .any(|comp| comp.contains(&c))
    }
}
