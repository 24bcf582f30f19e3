//! Kirby-Paris moves and their star-game simulation.

use super::{head_rule, HeadRule, HydraError, HydraState, Variant};
use crate::precedence::Precedence;
use crate::term::{Position, Term};
use crate::trace::{replay_step, validate_trace, Mode, Step, Trace};

/// The KP1/KP2 rewrite as a hydra-phase step.
pub(crate) fn kp_rule_step(rule: HeadRule, head: &Position, k: usize) -> Step {
    match rule {
        HeadRule::Kp1 => Step::new(crate::trace::Rule::Kp1, head.clone()),
        _ => Step::new(crate::trace::Rule::Kp2, head.clone()).count(k),
    }
}

/// Chops `head`; `k` is ignored for heads directly below the root.
pub fn kp_step(state: &HydraState, head: &Position, k: usize) -> Result<HydraState, HydraError> {
    if state.variant != Variant::Kp {
        return Err(HydraError::IllegalMove(format!(
            "kp_step on a {} hydra",
            state.variant
        )));
    }
    let rule = head_rule(state, head)?;
    let step = kp_rule_step(rule, head, k);
    let post = replay_step(&state.tree, &step, &Precedence::empty(), Mode::HydraPhase)
        .map_err(HydraError::IllegalMove)?;
    state.advance(post)
}

/// Simulates a KP move by star steps: the root (KP1) or the grandparent
/// (KP2) is starred and pushes copies of the mutilated parent downward.
pub fn compile_kp_step_to_star(pre: &Term, head: &Position, k: usize) -> Result<Trace, HydraError> {
    let state = HydraState::new(Variant::Kp, pre.clone())?;
    let post = kp_step(&state, head, k)?.tree;
    let steps = kp_star_steps(head, k);
    let trace = Trace {
        start: pre.clone(),
        steps,
        end: post,
    };
    validate_trace(&trace, &Precedence::empty(), Mode::Star)
        .map_err(|e| HydraError::Certificate(e.to_string()))?;
    Ok(trace)
}

/// Star steps chopping the leaf at `head` of a KP-shaped tree.
pub(crate) fn kp_star_steps(head: &Position, k: usize) -> Vec<Step> {
    let (anchor, rest) = if head.len() == 1 {
        (Position::root(), &head.0[..])
    } else {
        (
            Position(head.0[..head.len() - 2].to_vec()),
            &head.0[head.len() - 2..],
        )
    };
    let mut steps = vec![Step::put(anchor.clone())];
    if head.len() == 1 {
        steps.push(Step::down(anchor, rest[0], 0));
        return steps;
    }
    let (parent, leaf) = (rest[0], rest[1]);
    steps.push(Step::down(anchor.clone(), parent, k));
    for c in 0..k {
        steps.push(Step::down(anchor.child(parent + c), leaf, 0));
    }
    steps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;
    use crate::trace::Rule;
    use crate::tree::tree_equal;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn kp2_regrows_copies() {
        let s = HydraState::new(Variant::Kp, t("dagger(0(0,0))")).unwrap();
        let n = kp_step(&s, &Position(vec![1, 2]), 2).unwrap();
        assert_eq!(n.tree, t("dagger(0(0),0(0))"));
        assert_eq!(n.steps, 1);
        assert!(!n.slain);
    }

    #[test]
    fn kp1_ignores_k() {
        let s = HydraState::new(Variant::Kp, t("dagger(0)")).unwrap();
        let n = kp_step(&s, &Position(vec![1]), 9).unwrap();
        assert_eq!(n.tree, t("dagger"));
        assert!(n.slain);
    }

    #[test]
    fn internal_nodes_are_not_heads() {
        let s = HydraState::new(Variant::Kp, t("dagger(0(0,0))")).unwrap();
        assert!(kp_step(&s, &Position(vec![1]), 1).is_err());
    }

    #[test]
    fn node_count_bookkeeping() {
        let pre = t("dagger(0(0(0),0),0)");
        let s = HydraState::new(Variant::Kp, pre.clone()).unwrap();
        let kp1 = kp_step(&s, &Position(vec![2]), 0).unwrap();
        assert!(kp1.tree.size() < pre.size());
        let k0 = kp_step(&s, &Position(vec![1, 2]), 0).unwrap();
        assert!(k0.tree.size() < pre.size());
        let k1 = kp_step(&s, &Position(vec![1, 2]), 1).unwrap();
        assert_eq!(k1.tree.size(), pre.size() - 1);
    }

    #[test]
    fn compiled_shapes() {
        let kp1 = compile_kp_step_to_star(&t("dagger(0)"), &Position(vec![1]), 0).unwrap();
        assert_eq!(kp1.rules(), vec![Rule::Put, Rule::Down]);
        let kp2 = compile_kp_step_to_star(&t("dagger(0(0,0))"), &Position(vec![1, 2]), 2).unwrap();
        assert_eq!(
            kp2.rules(),
            vec![Rule::Put, Rule::Down, Rule::Down, Rule::Down]
        );
        assert!(tree_equal(&kp2.end, &t("dagger(0(0),0(0))")));
    }
}
