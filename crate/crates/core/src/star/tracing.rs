//! Symbol tracing: descendants and ancestors of node occurrences along a trace.
//!
//! Each step links every node of its source term to its copies in the target.
//! The head created by a copy step is the special descendant of the starred
//! head it replaces. Descendants along a trace are the relational composition
//! of the per-step links.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::TraceError;
use crate::precedence::Precedence;
use crate::term::{Position, Term};
use crate::trace::{validate_trace, Mode, Rule, Step, Trace};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Occurrence {
    /// Index into the intermediate terms of a trace, the start being 0.
    pub term_index: usize,
    pub position: Position,
}

impl Occurrence {
    pub fn new(term_index: usize, position: Position) -> Occurrence {
        Occurrence {
            term_index,
            position,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DescendantLink {
    pub from: Occurrence,
    pub to: Occurrence,
    /// Set only for the link from a copied head to the new head symbol.
    pub special: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TracingError {
    #[error("invalid occurrence {position} in term {term_index}")]
    InvalidOccurrence {
        term_index: usize,
        position: Position,
    },
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("projected subterm trace does not validate: {0}")]
    Projection(TraceError),
}

/// Links from the nodes of `pre` (term `index`) to the nodes of the next term.
pub fn step_links(pre: &Term, step: &Step, index: usize) -> Vec<DescendantLink> {
    let mut out = Vec::new();
    let r = &step.position;
    let k = step.params.count.unwrap_or(0);
    let i = step.params.child.unwrap_or(0);
    for q in pre.positions() {
        if pre.subterm_at(&q).expect("own position").is_var() {
            continue;
        }
        let mut link = |to: Position, special: bool| {
            out.push(DescendantLink {
                from: Occurrence::new(index, q.clone()),
                to: Occurrence::new(index + 1, to),
                special,
            })
        };
        if !r.is_prefix_of(&q) {
            link(q.clone(), false);
            continue;
        }
        let rel = &q.0[r.len()..];
        let below = |first: usize, rest: &[usize]| {
            let mut v = r.0.clone();
            v.push(first);
            v.extend_from_slice(rest);
            Position(v)
        };
        match step.rule {
            Rule::Select => {
                if rel.first() == Some(&i) {
                    let mut v = r.0.clone();
                    v.extend_from_slice(&rel[1..]);
                    link(Position(v), false);
                }
            }
            Rule::Copy => {
                if rel.is_empty() {
                    link(r.clone(), true);
                }
                for c in 1..=k {
                    let mut v = r.0.clone();
                    v.push(c);
                    v.extend_from_slice(rel);
                    link(Position(v), false);
                }
            }
            Rule::Down => match rel.first() {
                None => link(r.clone(), false),
                Some(&j) if j < i => link(q.clone(), false),
                Some(&j) if j == i => {
                    for c in 0..k {
                        link(below(i + c, &rel[1..]), false);
                    }
                }
                Some(&j) => link(below(j + k - 1, &rel[1..]), false),
            },
            _ => link(q.clone(), false),
        }
    }
    out
}

fn check_occurrence(terms: &[Term], occ: &Occurrence) -> Result<(), TracingError> {
    let bad = || TracingError::InvalidOccurrence {
        term_index: occ.term_index,
        position: occ.position.clone(),
    };
    let t = terms.get(occ.term_index).ok_or_else(bad)?;
    match t.subterm_at(&occ.position) {
        Ok(sub) if !sub.is_var() => Ok(()),
        _ => Err(bad()),
    }
}

/// Descendants of `occ` in the final term, each with whether the chain
/// leading to it passes through a special link.
pub fn descendants_with_special(
    trace: &Trace,
    prec: &Precedence,
    occ: &Occurrence,
) -> Result<BTreeMap<Position, bool>, TracingError> {
    let terms = validate_trace(trace, prec, Mode::Star)?;
    check_occurrence(&terms, occ)?;
    let mut frontier: BTreeMap<Position, bool> = BTreeMap::from([(occ.position.clone(), false)]);
    for (idx, step) in trace.steps.iter().enumerate().skip(occ.term_index) {
        let mut next = BTreeMap::new();
        for l in step_links(&terms[idx], step, idx) {
            if let Some(&sp) = frontier.get(&l.from.position) {
                let e = next.entry(l.to.position).or_insert(false);
                *e |= sp || l.special;
            }
        }
        frontier = next;
    }
    Ok(frontier)
}

/// All occurrences in the final term descending from `occ`.
pub fn descendants(
    trace: &Trace,
    prec: &Precedence,
    occ: &Occurrence,
) -> Result<Vec<Occurrence>, TracingError> {
    let last = trace.steps.len();
    Ok(descendants_with_special(trace, prec, occ)?
        .into_keys()
        .map(|p| Occurrence::new(last, p))
        .collect())
}

/// The unique occurrence in the start term of which `occ` (in the final term)
/// descends.
pub fn ancestor(
    trace: &Trace,
    prec: &Precedence,
    occ: &Occurrence,
) -> Result<Occurrence, TracingError> {
    let terms = validate_trace(trace, prec, Mode::Star)?;
    if occ.term_index != trace.steps.len() {
        return Err(TracingError::InvalidOccurrence {
            term_index: occ.term_index,
            position: occ.position.clone(),
        });
    }
    check_occurrence(&terms, occ)?;
    let mut pos = occ.position.clone();
    for idx in (0..trace.steps.len()).rev() {
        let from = step_links(&terms[idx], &trace.steps[idx], idx)
            .into_iter()
            .filter(|l| l.to.position == pos)
            .map(|l| l.from.position)
            .collect::<Vec<_>>();
        assert_eq!(from.len(), 1, "every node has exactly one parent link");
        pos = from.into_iter().next().expect("one link");
    }
    Ok(Occurrence::new(0, pos))
}

/// For `q` (final term) descending from `p` (start term), the reduction of
/// `start|p` to `end|q` read off the trace step by step. Each step of the
/// trace contributes at most one step.
pub fn project_to_subterm(
    trace: &Trace,
    prec: &Precedence,
    p: &Position,
    q: &Position,
) -> Result<Trace, TracingError> {
    let terms = validate_trace(trace, prec, Mode::Star)?;
    check_occurrence(&terms, &Occurrence::new(0, p.clone()))?;
    let mut cur = p.clone();
    let mut steps = Vec::new();
    for (idx, step) in trace.steps.iter().enumerate() {
        let links: Vec<DescendantLink> = step_links(&terms[idx], step, idx)
            .into_iter()
            .filter(|l| l.from.position == cur)
            .collect();
        // the branch leading to q: the link whose target is an ancestor-or-self of q after the remaining steps
        let next = links
            .iter()
            .find(|l| {
                let rest = Trace {
                    start: terms[idx + 1].clone(),
                    steps: trace.steps[idx + 1..].to_vec(),
                    end: trace.end.clone(),
                };
                descendants_with_special(&rest, prec, &Occurrence::new(0, l.to.position.clone()))
                    .map(|d| d.contains_key(q))
                    .unwrap_or(false)
            })
            .ok_or_else(|| TracingError::InvalidOccurrence {
                term_index: trace.steps.len(),
                position: q.clone(),
            })?;
        let r = &step.position;
        if cur.is_prefix_of(r) {
            let same_head_copy = step.rule == Rule::Copy && *r == cur && next.to.position != cur;
            if !same_head_copy {
                let mut rel = step.clone();
                rel.position = Position(r.0[cur.len()..].to_vec());
                steps.push(rel);
            }
        } else if step.rule == Rule::Down
            && r.is_prefix_of(&cur)
            && cur.len() == r.len() + 1
            && Some(cur.0[r.len()]) == step.params.child
        {
            steps.push(Step::put(Position::root()));
        }
        cur = next.to.position.clone();
    }
    let sub = Trace {
        start: terms[0].subterm_at(p).expect("checked").clone(),
        steps,
        end: trace.end.subterm_at(q).expect("descendant").clone(),
    };
    validate_trace(&sub, prec, Mode::Star).map_err(TracingError::Projection)?;
    Ok(sub)
}
