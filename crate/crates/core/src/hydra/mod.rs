//! Kirby-Paris, Buchholz and Star Hydras: states, legal heads, moves,
//! battles and the compilers from Hydra steps to star-game certificates.

pub mod battle;
pub mod bh;
pub mod kp;
pub mod policy;
pub mod sh;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::term::{Marker, Position, Symbol, Term};
use crate::trace::term_text;

pub use battle::{
    apply_move, choose_params, compile_move, record, records_to_json_lines, replay_log, run_battle,
    BattleLog, HydraParams, Limit, Limits, MoveRecord, Outcome, PlayerMove,
};
pub use bh::{bh_non_simulability_witness, bh_step, CycleWitness};
pub use kp::{compile_kp_step_to_star, kp_step};
pub use policy::{BetaRule, HerculesPolicy, HydraPolicy, PolicyKind, ShResponsePolicy};
pub use sh::{compile_sh_step_to_star, sh_precedence, sh_step, PhaseLog, ShChop, ShMove};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HydraError {
    #[error("illegal move: {0}")]
    IllegalMove(String),
    #[error("response violates a side condition: {0}")]
    SideCondition(String),
    #[error("invalid hydra: {0}")]
    InvalidHydra(String),
    #[error("phase log does not replay: {0}")]
    LogReplay(String),
    #[error("compiled certificate is invalid: {0}")]
    Certificate(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Kp,
    Bh,
    Sh,
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Variant, String> {
        match s.to_ascii_lowercase().as_str() {
            "kp" => Ok(Variant::Kp),
            "bh" => Ok(Variant::Bh),
            "sh" => Ok(Variant::Sh),
            other => Err(format!(
                "unknown hydra variant `{other}` (expected kp, bh or sh)"
            )),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Kp => "kp",
            Variant::Bh => "bh",
            Variant::Sh => "sh",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HydraState {
    pub variant: Variant,
    #[serde(with = "term_text")]
    pub tree: Term,
    pub steps: u64,
    pub slain: bool,
}

impl HydraState {
    /// A fresh state; fails if `tree` violates the variant's shape rules.
    pub fn new(variant: Variant, tree: Term) -> Result<HydraState, HydraError> {
        check_shape(variant, &tree).map_err(HydraError::InvalidHydra)?;
        Ok(HydraState {
            variant,
            slain: is_slain(variant, &tree),
            tree,
            steps: 0,
        })
    }

    pub(crate) fn advance(&self, tree: Term) -> Result<HydraState, HydraError> {
        check_shape(self.variant, &tree).map_err(|e| {
            HydraError::InvalidHydra(format!("post-state broke the invariant: {e}"))
        })?;
        Ok(HydraState {
            variant: self.variant,
            slain: is_slain(self.variant, &tree),
            tree,
            steps: self.steps + 1,
        })
    }
}

fn is_slain(variant: Variant, t: &Term) -> bool {
    match variant {
        Variant::Kp | Variant::Bh => t.children().is_empty(),
        Variant::Sh => t.size() == 1,
    }
}

/// Checks the labelling discipline of a variant.
pub fn check_shape(variant: Variant, t: &Term) -> Result<(), String> {
    let mut problem = None;
    walk(t, &Position::root(), &mut |p, node| {
        if problem.is_some() {
            return;
        }
        let Some(n) = node.as_node() else {
            problem = Some(format!("variable at {p}"));
            return;
        };
        if n.marker != Marker::None {
            problem = Some(format!("marked node at {p}"));
            return;
        }
        let s = &n.symbol;
        let ok = match variant {
            Variant::Kp => {
                (p.is_root() && *s == Symbol::dagger()) || (!p.is_root() && s.as_str() == "0")
            }
            Variant::Bh => match p.len() {
                0 => *s == Symbol::dagger(),
                1 => s.as_str() == "0",
                _ => s.as_natural().is_some() || *s == Symbol::omega(),
            },
            Variant::Sh => s.as_natural().is_some(),
        };
        if !ok {
            problem = Some(format!(
                "label {s} is not allowed at {p} in a {variant} hydra"
            ));
        }
    });
    problem.map_or(Ok(()), Err)
}

fn walk(t: &Term, p: &Position, f: &mut dyn FnMut(&Position, &Term)) {
    f(p, t);
    for (i, c) in t.children().iter().enumerate() {
        walk(c, &p.child(i + 1), f);
    }
}

/// Leaves of `t` below the root, in preorder.
pub(crate) fn leaves(t: &Term) -> Vec<Position> {
    let mut out = Vec::new();
    walk(t, &Position::root(), &mut |p, n| {
        if !p.is_root() && n.children().is_empty() {
            out.push(p.clone());
        }
    });
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeadRule {
    Kp1,
    Kp2,
    Bh1,
    Bh2,
    Bh3,
    ShChop,
}

/// The free parameter the Hydra picks after a chop.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ParamDomain {
    None,
    /// Number of regrown copies, any `k >= 0`.
    Copies,
    /// New natural label of an omega leaf.
    Relabel,
    /// A finite list of labels, each strictly below `below`.
    LabelsBelow {
        below: Symbol,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadDescriptor {
    /// The leaf that is chopped. For a Star Hydra chop the parent is its
    /// prefix and the child index its last component.
    pub position: Position,
    pub rule: HeadRule,
    pub domain: ParamDomain,
}

/// Every legal chop site; empty iff the Hydra is slain.
pub fn available_heads(state: &HydraState) -> Vec<HeadDescriptor> {
    let t = &state.tree;
    leaves(t)
        .into_iter()
        .filter_map(|p| {
            let label = t.subterm_at(&p).ok()?.symbol()?.clone();
            let (rule, domain) = match state.variant {
                Variant::Kp if p.len() == 1 => (HeadRule::Kp1, ParamDomain::None),
                Variant::Kp => (HeadRule::Kp2, ParamDomain::Copies),
                // Depth-1 heads have no grandparent; they fall off like KP1.
                Variant::Bh if p.len() == 1 => (HeadRule::Kp1, ParamDomain::None),
                Variant::Bh if label == Symbol::omega() => (HeadRule::Bh3, ParamDomain::Relabel),
                Variant::Bh if label.as_str() == "0" => (HeadRule::Bh1, ParamDomain::Copies),
                Variant::Bh => (HeadRule::Bh2, ParamDomain::None),
                Variant::Sh => (HeadRule::ShChop, ParamDomain::LabelsBelow { below: label }),
            };
            Some(HeadDescriptor {
                position: p,
                rule,
                domain,
            })
        })
        .collect()
}

pub(crate) fn head_rule(state: &HydraState, head: &Position) -> Result<HeadRule, HydraError> {
    available_heads(state)
        .into_iter()
        .find(|h| &h.position == head)
        .map(|h| h.rule)
        .ok_or_else(|| HydraError::IllegalMove(format!("{head} is not a head of {}", state.tree)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn state(v: Variant, s: &str) -> HydraState {
        HydraState::new(v, parse_term(s).unwrap()).unwrap()
    }

    #[test]
    fn kp_heads() {
        let hs = available_heads(&state(Variant::Kp, "dagger(0(0,0))"));
        assert_eq!(hs.len(), 2);
        assert!(hs
            .iter()
            .all(|h| h.rule == HeadRule::Kp2 && h.position.len() == 2));
        let hs = available_heads(&state(Variant::Kp, "dagger(0)"));
        assert_eq!(hs.len(), 1);
        assert_eq!(hs[0].rule, HeadRule::Kp1);
        let bare = state(Variant::Kp, "dagger");
        assert!(bare.slain);
        assert!(available_heads(&bare).is_empty());
    }

    #[test]
    fn bh_heads_by_label() {
        let hs = available_heads(&state(Variant::Bh, "dagger(0(omega),0(2,7(5)),0)"));
        let rules: Vec<HeadRule> = hs.iter().map(|h| h.rule).collect();
        assert_eq!(
            rules,
            vec![HeadRule::Bh3, HeadRule::Bh2, HeadRule::Bh2, HeadRule::Kp1]
        );
    }

    #[test]
    fn shapes_are_enforced() {
        assert!(HydraState::new(Variant::Kp, parse_term("dagger(1)").unwrap()).is_err());
        assert!(HydraState::new(Variant::Bh, parse_term("dagger(3)").unwrap()).is_err());
        assert!(HydraState::new(Variant::Sh, parse_term("4(omega)").unwrap()).is_err());
        assert!(HydraState::new(Variant::Sh, parse_term("4_(2)").unwrap()).is_err());
        assert!(state(Variant::Sh, "3").slain);
    }
}
