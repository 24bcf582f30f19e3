//! Battles as folds over moves, with a JSON-lines log.

use serde::{Deserialize, Serialize};

use super::kp::compile_kp_step_to_star;
use super::policy::{HerculesPolicy, HydraPolicy};
use super::sh::{chop_and_propagate, compile_sh_step_to_star, sh_step, PhaseLog, ShChop, ShMove};
use super::{bh_step, head_rule, kp_step, HeadRule, HydraError, HydraState, Variant};
use crate::precedence::Precedence;
use crate::syntax::parse_term;
use crate::term::{Position, Symbol, Term};
use crate::trace::Trace;

/// Trees larger than this are left out of log records.
pub const TREE_RECORD_LIMIT: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerMove {
    pub head: Position,
    pub rule: HeadRule,
}

/// The Hydra's free choices for one move. Unused fields stay `None`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HydraParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<Symbol>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<Vec<ShMove>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub step: u64,
    pub variant: Variant,
    /// The tree before the move; only the first record of a log carries it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    pub player_move: PlayerMove,
    pub hydra_params: HydraParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_log: Option<PhaseLog>,
    pub node_count: usize,
    /// The tree after the move, unless it is very large.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Limit {
    MaxSteps,
    MaxNodes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum Outcome {
    Slain,
    Truncated { limit: Limit },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_steps: u64,
    pub max_nodes: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_steps: 100_000,
            max_nodes: 100_000,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BattleLog {
    pub records: Vec<MoveRecord>,
    pub outcome: Outcome,
    pub final_state: HydraState,
}

impl BattleLog {
    pub fn to_json_lines(&self) -> String {
        records_to_json_lines(&self.records)
    }
}

pub fn records_to_json_lines(records: &[MoveRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

/// Lets `policy` pick the Hydra's parameters for chopping `head`.
pub fn choose_params(
    state: &HydraState,
    head: &Position,
    policy: &HydraPolicy,
) -> Result<HydraParams, HydraError> {
    let rule = head_rule(state, head)?;
    let mut rng = policy.rng_for(state.steps);
    let mut params = HydraParams::default();
    match rule {
        HeadRule::Kp1 | HeadRule::Bh2 => {}
        HeadRule::Kp2 | HeadRule::Bh1 | HeadRule::Bh3 => params.k = Some(policy.choose_k(&mut rng)),
        HeadRule::ShChop => {
            let chop = policy
                .choose_chop(&state.tree, head, &mut rng)
                .ok_or_else(|| HydraError::IllegalMove(format!("{head} is not a head")))?;
            let mut symbols = state.tree.symbols();
            symbols.extend(chop.betas.iter().cloned());
            let (underlined, _) =
                chop_and_propagate(&state.tree, &chop, &Precedence::numeric(&symbols))?;
            params.response = Some(policy.choose_response(&underlined, &mut rng));
            params.betas = Some(chop.betas);
        }
    }
    Ok(params)
}

/// Applies one move; Star Hydra moves also return their phase log.
pub fn apply_move(
    state: &HydraState,
    head: &Position,
    params: &HydraParams,
) -> Result<(HydraState, Option<PhaseLog>), HydraError> {
    match state.variant {
        Variant::Kp => {
            let k = match head_rule(state, head)? {
                HeadRule::Kp2 => params.k.ok_or_else(|| {
                    HydraError::IllegalMove("a KP2 chop needs a parameter k".into())
                })?,
                _ => 0,
            };
            Ok((kp_step(state, head, k)?, None))
        }
        Variant::Bh => Ok((bh_step(state, head, params.k)?, None)),
        Variant::Sh => {
            let chop = ShChop::at_leaf(head, params.betas.clone().unwrap_or_default())
                .ok_or_else(|| HydraError::IllegalMove("the root is not a head".into()))?;
            let (next, log) =
                sh_step(state, &chop, params.response.as_deref().unwrap_or_default())?;
            Ok((next, Some(log)))
        }
    }
}

/// The star certificate for a move, for the variants that have one.
pub fn compile_move(
    pre: &HydraState,
    head: &Position,
    params: &HydraParams,
    log: Option<&PhaseLog>,
) -> Option<Result<Trace, HydraError>> {
    match pre.variant {
        Variant::Kp => Some(compile_kp_step_to_star(
            &pre.tree,
            head,
            params.k.unwrap_or(0),
        )),
        Variant::Sh => Some(match log {
            Some(log) => compile_sh_step_to_star(&pre.tree, log),
            None => Err(HydraError::LogReplay(
                "a Star Hydra move needs its phase log".into(),
            )),
        }),
        Variant::Bh => None,
    }
}

/// The log record for the move `pre -> next`.
pub fn record(
    pre: &HydraState,
    next: &HydraState,
    head: &Position,
    params: HydraParams,
    log: Option<PhaseLog>,
) -> MoveRecord {
    let rule = head_rule(pre, head).expect("move was legal");
    let size = next.tree.size();
    MoveRecord {
        step: next.steps,
        variant: pre.variant,
        initial: (pre.steps == 0).then(|| pre.tree.to_string()),
        player_move: PlayerMove {
            head: head.clone(),
            rule,
        },
        hydra_params: params,
        phase_log: log,
        node_count: size,
        tree: (size <= TREE_RECORD_LIMIT).then(|| next.tree.to_string()),
    }
}

/// Plays until the Hydra is slain or a limit trips.
pub fn run_battle(
    variant: Variant,
    initial: Term,
    hercules: &HerculesPolicy,
    hydra: &HydraPolicy,
    limits: Limits,
) -> Result<BattleLog, HydraError> {
    let mut state = HydraState::new(variant, initial)?;
    let mut records = Vec::new();
    let outcome = loop {
        if state.slain {
            break Outcome::Slain;
        }
        if state.steps >= limits.max_steps {
            break Outcome::Truncated {
                limit: Limit::MaxSteps,
            };
        }
        if state.tree.size() > limits.max_nodes {
            break Outcome::Truncated {
                limit: Limit::MaxNodes,
            };
        }
        let head = hercules
            .choose(&state)
            .ok_or_else(|| HydraError::IllegalMove("no head available on a living hydra".into()))?
            .position;
        let params = choose_params(&state, &head, hydra)?;
        let (next, log) = apply_move(&state, &head, &params)?;
        records.push(record(&state, &next, &head, params, log));
        state = next;
    };
    Ok(BattleLog {
        records,
        outcome,
        final_state: state,
    })
}

/// Replays logged moves from the first record's initial tree, checking
/// every recorded tree and phase log.
pub fn replay_log(records: &[MoveRecord]) -> Result<HydraState, HydraError> {
    let first = records
        .first()
        .ok_or_else(|| HydraError::LogReplay("empty log".into()))?;
    let initial = first
        .initial
        .as_deref()
        .ok_or_else(|| HydraError::LogReplay("first record lacks the initial tree".into()))?;
    let tree = parse_term(initial).map_err(|e| HydraError::LogReplay(e.to_string()))?;
    let mut state = HydraState::new(first.variant, tree)?;
    for r in records {
        let (next, log) = apply_move(&state, &r.player_move.head, &r.hydra_params)?;
        if let Some(t) = &r.tree {
            if *t != next.tree.to_string() {
                return Err(HydraError::LogReplay(format!(
                    "step {}: recorded {t}, replayed {}",
                    r.step, next.tree
                )));
            }
        }
        if r.phase_log.is_some() && r.phase_log != log {
            return Err(HydraError::LogReplay(format!(
                "step {}: phase log differs",
                r.step
            )));
        }
        state = next;
    }
    Ok(state)
}
