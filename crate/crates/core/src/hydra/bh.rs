//! Buchholz moves, and the trace showing why no star certificate exists
//! for them.

use serde::{Deserialize, Serialize};

use super::{head_rule, HeadRule, HydraError, HydraState, Variant};
use crate::precedence::Precedence;
use crate::star::{search_reduction, Budget, NotFound};
use crate::syntax::parse_term;
use crate::term::{Position, Symbol, Term};
use crate::trace::{replay_step, validate_trace, Mode, Rule, Step, Trace};
use crate::tree::tree_equal;

/// Regrowth of a successor-labelled leaf: the subtree at the closest
/// ancestor `y` with `label(y) <= α` is copied, `y` relabelled `α - 1` and
/// the leaf relabelled `0` in the copy, and the copy replaces the leaf.
pub fn bh2_rewrite(t: &Term, p: &Position) -> Result<Term, String> {
    let leaf = t.subterm_at(p).map_err(|e| e.to_string())?;
    if !leaf.children().is_empty() || !leaf.marker().is_none() {
        return Err(format!("{p} is not an unmarked leaf"));
    }
    let alpha = leaf
        .symbol()
        .and_then(Symbol::as_natural)
        .filter(|&a| a > 0)
        .ok_or_else(|| format!("label at {p} is not a successor natural"))?;
    let mut y = p.parent().ok_or("the root is not a head")?;
    loop {
        let label = t
            .subterm_at(&y)
            .map_err(|e| e.to_string())?
            .symbol()
            .and_then(Symbol::as_natural);
        if matches!(label, Some(l) if l <= alpha) {
            break;
        }
        y = y
            .parent()
            .ok_or("no ancestor is labelled at most the head")?;
    }
    let below = Position(p.0[y.len()..].to_vec());
    let subtree = t.subterm_at(&y).map_err(|e| e.to_string())?;
    let zeroed = subtree
        .replace_at(&below, Term::leaf(Symbol::natural(0)))
        .map_err(|e| e.to_string())?;
    let n = zeroed.as_node().expect("ancestor is a node");
    let grafted = Term::app(Symbol::natural(alpha - 1), n.children.clone());
    t.replace_at(p, grafted).map_err(|e| e.to_string())
}

/// Chops `head`; `k` is needed for heads labelled 0 below depth 1 and for
/// omega heads.
pub fn bh_step(
    state: &HydraState,
    head: &Position,
    k: Option<usize>,
) -> Result<HydraState, HydraError> {
    if state.variant != Variant::Bh {
        return Err(HydraError::IllegalMove(format!(
            "bh_step on a {} hydra",
            state.variant
        )));
    }
    let rule = head_rule(state, head)?;
    let need_k =
        || k.ok_or_else(|| HydraError::IllegalMove(format!("{rule:?} needs a parameter k")));
    let step = match rule {
        HeadRule::Kp1 => Step::new(Rule::Kp1, head.clone()),
        HeadRule::Bh1 => Step::new(Rule::Bh1, head.clone()).count(need_k()?),
        HeadRule::Bh2 => Step::new(Rule::Bh2, head.clone()),
        HeadRule::Bh3 => {
            Step::new(Rule::Bh3, head.clone()).symbol(Symbol::natural(need_k()? as u64))
        }
        other => {
            return Err(HydraError::IllegalMove(format!(
                "{other:?} is not a Buchholz rule"
            )))
        }
    };
    let post = replay_step(&state.tree, &step, &Precedence::empty(), Mode::HydraPhase)
        .map_err(HydraError::IllegalMove)?;
    state.advance(post)
}

/// A Buchholz step together with a star trace leading from its result back
/// to a tree equal to its start. A star trace for the step itself would
/// close a cycle through unmarked trees.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CycleWitness {
    /// One BH2 step, replayable in hydra-phase mode.
    pub bh_step: Trace,
    /// Star steps from the step's result back to its start.
    pub fragment: Trace,
    pub precedence: Vec<(Symbol, Symbol)>,
}

impl CycleWitness {
    pub fn precedence(&self) -> Precedence {
        Precedence::new(self.precedence.clone()).expect("witness precedence is a chain")
    }

    /// Replays both traces and checks that they close up.
    pub fn check(&self) -> Result<(), String> {
        let prec = self.precedence();
        validate_trace(&self.bh_step, &prec, Mode::HydraPhase).map_err(|e| e.to_string())?;
        validate_trace(&self.fragment, &prec, Mode::Star).map_err(|e| e.to_string())?;
        if self.fragment.start != self.bh_step.end {
            return Err("fragment does not start where the Buchholz step ends".into());
        }
        if !tree_equal(&self.fragment.end, &self.bh_step.start) {
            return Err("fragment does not return to the Buchholz step's start".into());
        }
        if !self.fragment.start.is_unmarked() || !self.fragment.end.is_unmarked() {
            return Err("cycle passes through a marked endpoint".into());
        }
        Ok(())
    }

    /// Looks for the star reduction that would simulate the Buchholz step.
    pub fn search_forbidden(&self, budget: Budget) -> Result<Trace, NotFound> {
        search_reduction(
            &self.bh_step.start,
            &self.bh_step.end,
            &self.precedence(),
            budget,
        )
    }
}

pub fn bh_non_simulability_witness() -> CycleWitness {
    let t = |s: &str| parse_term(s).expect("literal term");
    let start = t("dagger(0(3(2)))");
    let grown = t("dagger(0(3(1(3(0)))))");
    let bh_step = Trace {
        start: start.clone(),
        steps: vec![Step::new(Rule::Bh2, Position(vec![1, 1, 1]))],
        end: grown.clone(),
    };
    let at = Position(vec![1, 1, 1]);
    let fragment = Trace {
        start: grown,
        steps: vec![
            Step::put(at.clone()),
            Step::select(at.clone(), 1),
            Step::put(at.clone()),
            Step::copy(at, Symbol::natural(2), 0),
        ],
        end: start,
    };
    let symbols: Vec<Symbol> = (0..4).map(Symbol::natural).collect();
    let precedence = Precedence::numeric(&symbols).generators().to_vec();
    CycleWitness {
        bh_step,
        fragment,
        precedence,
    }
}
