//! Breadth-first search for star reductions between trees.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::precedence::Precedence;
use crate::star::successors::star_successors;
use crate::term::Term;
use crate::trace::{validate_trace, Mode, Step, Trace};
use crate::tree::canonicalize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_depth: usize,
    pub max_copies: usize,
    /// Size cap on intermediate terms; `None` means `|s| + |t| + 8`.
    pub max_size: Option<usize>,
    /// Distinct trees visited before giving up.
    pub max_states: usize,
}

impl Default for Budget {
    fn default() -> Budget {
        Budget {
            max_depth: 64,
            max_copies: 3,
            max_size: None,
            max_states: 200_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NotFoundReason {
    /// The state budget ran out.
    BudgetExhausted,
    /// Every tree within the size and depth caps was visited.
    ExhaustedSpace,
}

impl fmt::Display for NotFoundReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NotFoundReason::BudgetExhausted => "budget exhausted",
            NotFoundReason::ExhaustedSpace => "search space exhausted",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("no reduction found ({reason}, {states} trees visited)")]
pub struct NotFound {
    pub reason: NotFoundReason,
    pub states: usize,
}

/// Searches for `s ⤇+ t'` with `t'` tree-equal to `t`. Sound but incomplete:
/// every returned trace validates, a miss only reports the budget.
pub fn search_reduction(
    s: &Term,
    t: &Term,
    prec: &Precedence,
    budget: Budget,
) -> Result<Trace, NotFound> {
    let target = canonicalize(t);
    let max_size = budget.max_size.unwrap_or(s.size() + t.size() + 8);
    // (representative, parent, step, depth)
    let mut states: Vec<(Term, usize, Option<Step>, usize)> = vec![(s.clone(), 0, None, 0)];
    let mut seen: HashMap<Term, usize> = HashMap::from([(canonicalize(s), 0)]);
    let mut truncated = false;
    let mut head = 0;
    while head < states.len() {
        let (u, _, _, depth) = states[head].clone();
        if depth >= budget.max_depth {
            truncated = true;
            head += 1;
            continue;
        }
        for (step, v) in star_successors(&u, prec, budget.max_copies) {
            if v.size() > max_size {
                truncated = true;
                continue;
            }
            let cv = canonicalize(&v);
            if cv == target {
                let mut steps = vec![step];
                let mut at = head;
                while let (_, parent, Some(st), _) = &states[at] {
                    steps.push(st.clone());
                    at = *parent;
                }
                steps.reverse();
                let trace = Trace {
                    start: s.clone(),
                    steps,
                    end: v,
                };
                validate_trace(&trace, prec, Mode::Star).expect("search follows the rules");
                return Ok(trace);
            }
            if seen.contains_key(&cv) {
                continue;
            }
            if states.len() >= budget.max_states {
                return Err(NotFound {
                    reason: NotFoundReason::BudgetExhausted,
                    states: states.len(),
                });
            }
            seen.insert(cv, states.len());
            states.push((v, head, Some(step), depth + 1));
        }
        head += 1;
    }
    let reason = if truncated {
        NotFoundReason::BudgetExhausted
    } else {
        NotFoundReason::ExhaustedSpace
    };
    Err(NotFound {
        reason,
        states: states.len(),
    })
}
