//! One battle with undo history and served views.

use serde::{Deserialize, Serialize};
use starpath::hydra::{
    apply_move, available_heads, choose_params, compile_move, record, records_to_json_lines,
    sh_precedence, HeadDescriptor, HeadRule, HydraError, HydraParams, HydraPolicy, HydraState,
    Limits, MoveRecord, ParamDomain, ShMove, Variant,
};
use starpath::{parse_term, tree_equal, validate_trace, Position, Precedence, Trace};
use thiserror::Error;

use crate::ids::{NodeIds, NodeView};

/// Largest replication count or relabelling accepted from a client.
pub const MAX_PARAM: usize = 1_000;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("invalid request: {0}")]
    Invalid(String),
    #[error("illegal move: {0}")]
    Illegal(String),
    #[error("parameters out of domain: {0}")]
    Params(String),
    #[error("nothing to undo")]
    NothingToUndo,
    #[error("certificate failed its self-check: {0}")]
    Certificate(String),
}

impl From<HydraError> for SessionError {
    fn from(e: HydraError) -> Self {
        match e {
            HydraError::SideCondition(m) => SessionError::Params(m),
            HydraError::InvalidHydra(m) => SessionError::Invalid(m),
            HydraError::Certificate(m) => SessionError::Certificate(m),
            other => SessionError::Illegal(other.to_string()),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct HistoryEntry {
    state: HydraState,
    ids: NodeIds,
    record: MoveRecord,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub state: HydraState,
    pub policy: HydraPolicy,
    pub seed: u64,
    ids: NodeIds,
    history: Vec<HistoryEntry>,
    pub created: u64,
    pub updated: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadView {
    /// Id of the leaf to chop.
    pub id: u64,
    pub position: Position,
    pub rule: HeadRule,
    pub domain: ParamDomain,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateView {
    pub session_id: String,
    pub variant: Variant,
    pub term: String,
    pub tree: NodeView,
    pub steps: u64,
    pub slain: bool,
    pub heads: Vec<HeadView>,
    pub can_undo: bool,
}

/// One frame of a move, for animation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substep {
    pub phase: String,
    pub term: String,
    pub tree: NodeView,
    /// The regrown subtree, for Buchholz regrowth.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grafted: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChopOutcome {
    pub state: StateView,
    pub substeps: Vec<Substep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Trace>,
}

impl Session {
    pub fn new(
        id: String,
        variant: Variant,
        initial: &str,
        policy: HydraPolicy,
        seed: u64,
        now: u64,
    ) -> Result<Session, SessionError> {
        let tree = parse_term(initial).map_err(|e| SessionError::Invalid(e.to_string()))?;
        let state = HydraState::new(variant, tree)?;
        Ok(Session {
            id,
            ids: NodeIds::fresh(&state.tree),
            state,
            policy,
            seed,
            history: Vec::new(),
            created: now,
            updated: now,
        })
    }

    pub fn view(&self) -> StateView {
        let t = &self.state.tree;
        let heads = available_heads(&self.state)
            .into_iter()
            .map(|h| HeadView {
                id: self.ids.id_of(t, &h.position).expect("heads are nodes"),
                position: h.position,
                rule: h.rule,
                domain: h.domain,
            })
            .collect();
        StateView {
            session_id: self.id.clone(),
            variant: self.state.variant,
            term: t.to_string(),
            tree: NodeView::build(t, &self.ids),
            steps: self.state.steps,
            slain: self.state.slain,
            heads,
            can_undo: !self.history.is_empty(),
        }
    }

    fn head(&self, id: u64) -> Result<HeadDescriptor, SessionError> {
        let p = self
            .ids
            .position_of(&self.state.tree, id)
            .ok_or_else(|| SessionError::Illegal(format!("no node with id {id}")))?;
        available_heads(&self.state)
            .into_iter()
            .find(|h| h.position == p)
            .ok_or_else(|| SessionError::Illegal(format!("node {id} is not a head")))
    }

    /// Chops the head with node id `head_id`. Missing parameters are chosen
    /// by the session's policy.
    pub fn chop(
        &mut self,
        head_id: u64,
        params: Option<HydraParams>,
        want_certificate: bool,
        now: u64,
    ) -> Result<ChopOutcome, SessionError> {
        let head = self.head(head_id)?;
        let params = match params {
            Some(p) => {
                check_domain(&head, &p)?;
                p
            }
            None => choose_params(&self.state, &head.position, &self.policy)?,
        };
        let pre = self.state.clone();
        let (next, log) = apply_move(&pre, &head.position, &params)?;
        if next.tree.size() > Limits::default().max_nodes {
            return Err(SessionError::Params(format!(
                "regrowth to {} nodes exceeds the node limit",
                next.tree.size()
            )));
        }
        let certificate = if want_certificate {
            match compile_move(&pre, &head.position, &params, log.as_ref()) {
                Some(c) => {
                    let c = c?;
                    let prec = match &log {
                        Some(l) => sh_precedence(&pre.tree, l),
                        None => Precedence::empty(),
                    };
                    validate_trace(&c, &prec, starpath::Mode::Star)
                        .map_err(|e| SessionError::Certificate(e.to_string()))?;
                    if !tree_equal(&c.end, &next.tree) {
                        return Err(SessionError::Certificate(
                            "certificate ends away from the post-state".into(),
                        ));
                    }
                    Some(c)
                }
                None => None,
            }
        } else {
            None
        };

        let mut substeps = Vec::new();
        let mut ids = self.ids.clone();
        let mut prev = pre.tree.clone();
        match &log {
            Some(l) => {
                for (phase, t) in l.phases(&pre.tree)? {
                    ids = ids.diff(&prev, &t);
                    substeps.push(Substep {
                        phase: phase.to_string(),
                        term: t.to_string(),
                        tree: NodeView::build(&t, &ids),
                        grafted: None,
                    });
                    prev = t;
                }
            }
            None => {
                ids = ids.diff(&prev, &next.tree);
                let grafted = (head.rule == HeadRule::Bh2)
                    .then(|| {
                        next.tree
                            .subterm_at(&head.position)
                            .map(|s| s.to_string())
                            .ok()
                    })
                    .flatten();
                substeps.push(Substep {
                    phase: serde_json::to_value(head.rule)
                        .ok()
                        .and_then(|v| v.as_str().map(String::from))
                        .unwrap_or_default(),
                    term: next.tree.to_string(),
                    tree: NodeView::build(&next.tree, &ids),
                    grafted,
                });
            }
        }

        let rec = record(&pre, &next, &head.position, params, log);
        self.history.push(HistoryEntry {
            state: pre,
            ids: std::mem::replace(&mut self.ids, ids),
            record: rec,
        });
        self.state = next;
        self.updated = now;
        Ok(ChopOutcome {
            state: self.view(),
            substeps,
            certificate,
        })
    }

    /// Pops exactly one move.
    pub fn undo(&mut self, now: u64) -> Result<StateView, SessionError> {
        let last = self.history.pop().ok_or(SessionError::NothingToUndo)?;
        self.state = last.state;
        self.ids = last.ids;
        self.updated = now;
        Ok(self.view())
    }

    pub fn records(&self) -> Vec<MoveRecord> {
        self.history.iter().map(|h| h.record.clone()).collect()
    }

    /// The battle log as JSON lines.
    pub fn export_log(&self) -> String {
        records_to_json_lines(&self.records())
    }
}

fn check_domain(head: &HeadDescriptor, p: &HydraParams) -> Result<(), SessionError> {
    let bad = |m: String| Err(SessionError::Params(m));
    match &head.domain {
        ParamDomain::None => Ok(()),
        ParamDomain::Copies | ParamDomain::Relabel => match p.k {
            None => bad(format!("{:?} needs k", head.rule)),
            Some(k) if k > MAX_PARAM => bad(format!("k = {k} exceeds {MAX_PARAM}")),
            Some(_) => Ok(()),
        },
        ParamDomain::LabelsBelow { below } => {
            let alpha = below.as_natural().unwrap_or(0);
            let betas = p.betas.as_deref().unwrap_or_default();
            if betas.len() > MAX_PARAM {
                return bad(format!("{} regrown leaves exceed {MAX_PARAM}", betas.len()));
            }
            // checked before the move runs: the node limit only sees the result
            for m in p.response.as_deref().unwrap_or_default() {
                if let ShMove::Widen { count, .. } = m {
                    if *count > MAX_PARAM {
                        return bad(format!("widen count {count} exceeds {MAX_PARAM}"));
                    }
                }
            }
            match betas
                .iter()
                .find(|b| !matches!(b.as_natural(), Some(n) if n < alpha))
            {
                Some(b) => bad(format!("label {b} is not below {below}")),
                None => Ok(()),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use starpath::Symbol;

    fn kp() -> Session {
        Session::new(
            "s".into(),
            Variant::Kp,
            "dagger(0(0,0))",
            HydraPolicy::fixed(2),
            0,
            0,
        )
        .unwrap()
    }

    #[test]
    fn chop_and_undo_roundtrip() {
        let mut s = kp();
        let before = s.view();
        assert_eq!(before.heads.len(), 2);
        let out = s.chop(before.heads[0].id, None, true, 1).unwrap();
        assert!(tree_equal(
            &parse_term(&out.state.term).unwrap(),
            &parse_term("dagger(0(0),0(0))").unwrap()
        ));
        assert!(out.certificate.unwrap().len() >= 2);
        assert_eq!(s.undo(2).unwrap(), before);
        assert!(matches!(s.undo(3), Err(SessionError::NothingToUndo)));
    }

    #[test]
    fn params_are_checked_against_the_domain() {
        let mut s = kp();
        let h = s.view().heads[0].id;
        let p = HydraParams {
            k: Some(MAX_PARAM + 1),
            ..HydraParams::default()
        };
        assert!(matches!(
            s.chop(h, Some(p), false, 1),
            Err(SessionError::Params(_))
        ));
        assert!(matches!(
            s.chop(0, None, false, 1),
            Err(SessionError::Illegal(_))
        ));
    }

    #[test]
    fn huge_widens_are_refused_before_running() {
        let mut s = Session::new(
            "s".into(),
            Variant::Sh,
            "2(1(1))",
            HydraPolicy::fixed(1),
            0,
            0,
        )
        .unwrap();
        let h = s.view().heads[0].id;
        let p = HydraParams {
            betas: Some(vec![Symbol::natural(0)]),
            response: Some(vec![ShMove::Widen {
                position: Position::root(),
                child: 1,
                count: 1_000_000_000,
            }]),
            ..HydraParams::default()
        };
        assert!(matches!(
            s.chop(h, Some(p), false, 1),
            Err(SessionError::Params(_))
        ));
    }
}
