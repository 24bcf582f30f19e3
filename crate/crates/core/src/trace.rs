//! Traces: replayable sequences of named rewrite steps, and their validator.
//!
//! Every certificate produced anywhere in this crate is a [`Trace`] and is
//! checked by [`validate_trace`], which replays each step through the rule
//! schemas of the chosen [`Mode`].

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::TraceError;
use crate::precedence::Precedence;
use crate::schema::{RuleSchema, SchemaParams, SideCondition};
use crate::term::{Marker, Position, Symbol, Term};
use crate::tree::tree_equal;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Put,
    Select,
    Copy,
    Down,
    Remove,
    Decrease,
    Kp1,
    Kp2,
    Bh1,
    Bh2,
    Bh3,
    Chop,
    Propagate,
    Widen,
    Lengthen,
    Waive,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("rule serializes");
        f.write_str(s.as_str().expect("rule is a string"))
    }
}

/// Which rule set a trace is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// put / select / copy / down with plain stars.
    Star,
    /// The energized variant: stars carry natural-number energy.
    Omega,
    /// Removing, selecting and decreasing, the rewriting presentation of embedding.
    Embedding,
    /// Hydra moves and the phases of a Star Hydra step.
    HydraPhase,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Star => "star",
            Mode::Omega => "omega",
            Mode::Embedding => "embedding",
            Mode::HydraPhase => "hydra-phase",
        })
    }
}

/// Free parameters of a step. Which fields are required depends on the rule.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StepParams {
    /// 1-based child index (select, down, remove, propagate, widen).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub child: Option<usize>,
    /// Replication count (copy, down, widen, kp2, bh1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// Chosen symbol (copy target, decreased label, lengthen label, bh3 relabel).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<Symbol>,
    /// Energy assigned by an energized put.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<u32>,
    /// Regrown labels of a Star Hydra chop.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<Symbol>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Step {
    pub rule: Rule,
    pub position: Position,
    #[serde(default)]
    pub params: StepParams,
}

impl Step {
    pub fn new(rule: Rule, position: Position) -> Step {
        Step {
            rule,
            position,
            params: StepParams::default(),
        }
    }

    pub fn put(p: Position) -> Step {
        Step::new(Rule::Put, p)
    }

    pub fn put_energy(p: Position, n: u32) -> Step {
        Step::new(Rule::Put, p).energy(n)
    }

    pub fn select(p: Position, child: usize) -> Step {
        Step::new(Rule::Select, p).child(child)
    }

    pub fn copy(p: Position, g: Symbol, k: usize) -> Step {
        Step::new(Rule::Copy, p).symbol(g).count(k)
    }

    pub fn down(p: Position, child: usize, k: usize) -> Step {
        Step::new(Rule::Down, p).child(child).count(k)
    }

    pub fn child(mut self, i: usize) -> Step {
        self.params.child = Some(i);
        self
    }

    pub fn count(mut self, k: usize) -> Step {
        self.params.count = Some(k);
        self
    }

    pub fn symbol(mut self, s: Symbol) -> Step {
        self.params.symbol = Some(s);
        self
    }

    pub fn energy(mut self, n: u32) -> Step {
        self.params.energy = Some(n);
        self
    }

    pub fn labels(mut self, ls: Vec<Symbol>) -> Step {
        self.params.labels = Some(ls);
        self
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}", self.rule, self.position)?;
        let p = &self.params;
        let mut extra = Vec::new();
        if let Some(c) = p.child {
            extra.push(format!("child={c}"));
        }
        if let Some(s) = &p.symbol {
            extra.push(format!("symbol={s}"));
        }
        if let Some(k) = p.count {
            extra.push(format!("k={k}"));
        }
        if let Some(n) = p.energy {
            extra.push(format!("energy={n}"));
        }
        if let Some(ls) = &p.labels {
            let ls: Vec<String> = ls.iter().map(|s| s.to_string()).collect();
            extra.push(format!("labels=[{}]", ls.join(",")));
        }
        if !extra.is_empty() {
            write!(f, " ({})", extra.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    #[serde(with = "term_text")]
    pub start: Term,
    pub steps: Vec<Step>,
    #[serde(with = "term_text")]
    pub end: Term,
}

impl Trace {
    pub fn empty(t: Term) -> Trace {
        Trace {
            start: t.clone(),
            steps: Vec::new(),
            end: t,
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn rules(&self) -> Vec<Rule> {
        self.steps.iter().map(|s| s.rule).collect()
    }

    /// The steps as the JSON list `[{rule, position, params}, ...]`.
    pub fn steps_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.steps).expect("steps serialize")
    }

    /// Appends `other`, whose start must be the end of `self`.
    pub fn then(mut self, other: Trace) -> Trace {
        self.steps.extend(other.steps);
        self.end = other.end;
        self
    }
}

/// Serde helper storing terms in their textual syntax.
pub mod term_text {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::syntax::parse_term;
    use crate::term::Term;

    pub fn serialize<S: Serializer>(t: &Term, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&t.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Term, D::Error> {
        let s = String::deserialize(d)?;
        parse_term(&s).map_err(serde::de::Error::custom)
    }
}

struct Schemas {
    star: [RuleSchema; 4],
    omega: [RuleSchema; 4],
    embedding: [RuleSchema; 3],
    kp1: RuleSchema,
    kp2: RuleSchema,
    bh1: RuleSchema,
    bh3: RuleSchema,
    propagate: RuleSchema,
    widen: RuleSchema,
    lengthen: RuleSchema,
    waive: RuleSchema,
}

fn schemas() -> &'static Schemas {
    static SCHEMAS: OnceLock<Schemas> = OnceLock::new();
    SCHEMAS.get_or_init(|| {
        let gt = |a: &str, b: &str| vec![SideCondition::Greater(a.into(), b.into())];
        let s = |name: &str, text: &str| RuleSchema::parse(name, text, vec![]);
        Schemas {
            star: [
                s("put", "$F(?xs..) -> $F*(?xs..)"),
                s("select", "$F*(?xs.., ?y, ?zs..) -> ?y"),
                RuleSchema::parse("copy", "$F*(?xs..) -> $G([$F*(?xs..); k])", gt("F", "G")),
                s(
                    "down",
                    "$F*(?xs.., $G(?ys..), ?zs..) -> $F(?xs.., [$G*(?ys..); k], ?zs..)",
                ),
            ],
            omega: [
                s("put", "$F(?xs..) -> $F^$n(?xs..)"),
                s("select", "$F^$n+1(?xs.., ?y, ?zs..) -> ?y"),
                RuleSchema::parse(
                    "copy",
                    "$F^$n+1(?xs..) -> $G([$F^$n(?xs..); k])",
                    gt("F", "G"),
                ),
                s(
                    "down",
                    "$F^$n+1(?xs.., $G(?ys..), ?zs..) -> $F(?xs.., [$G^$n(?ys..); k], ?zs..)",
                ),
            ],
            embedding: [
                s("remove", "$F(?xs.., ?y, ?zs..) -> $F(?xs.., ?zs..)"),
                s("select", "$F(?xs.., ?y, ?zs..) -> ?y"),
                RuleSchema::parse("decrease", "$F(?xs..) -> $G(?xs..)", gt("F", "G")),
            ],
            kp1: s("kp1", "dagger(?xs.., 0, ?zs..) -> dagger(?xs.., ?zs..)"),
            kp2: s(
                "kp2",
                "$F(?xs.., 0(?ys.., 0, ?ws..), ?zs..) -> $F(?xs.., [0(?ys.., ?ws..); k], ?zs..)",
            ),
            bh1: s(
                "bh1",
                "$X(?xs.., $A(?ys.., 0, ?ws..), ?zs..) -> $X(?xs.., [$A(?ys.., ?ws..); k], ?zs..)",
            ),
            bh3: RuleSchema::parse(
                "bh3",
                "$Z(?xs.., omega, ?zs..) -> $Z(?xs.., $K, ?zs..)",
                vec![SideCondition::Natural("K".into())],
            ),
            propagate: s(
                "propagate",
                "$N(?xs.., $M_(?ys..), ?zs..) -> $N_(?xs.., $M_(?ys..), ?zs..)",
            ),
            widen: s(
                "widen",
                "$N_(?xs.., $M_(?ys..), ?zs..) -> $N_(?xs.., [$M_(?ys..); k], ?zs..)",
            ),
            lengthen: RuleSchema::parse("lengthen", "$N_(?xs..) -> $M_($N_(?xs..))", gt("N", "M")),
            waive: s("waive", "$M_(?xs..) -> $M(?xs..)"),
        }
    })
}

/// The rules admitted by a mode.
pub fn rules_of(mode: Mode) -> &'static [Rule] {
    match mode {
        Mode::Star | Mode::Omega => &[Rule::Put, Rule::Select, Rule::Copy, Rule::Down],
        Mode::Embedding => &[Rule::Remove, Rule::Select, Rule::Decrease],
        Mode::HydraPhase => &[
            Rule::Kp1,
            Rule::Kp2,
            Rule::Bh1,
            Rule::Bh2,
            Rule::Bh3,
            Rule::Chop,
            Rule::Propagate,
            Rule::Widen,
            Rule::Lengthen,
            Rule::Waive,
        ],
    }
}

fn need<T: Clone>(v: &Option<T>, what: &str) -> Result<T, String> {
    v.clone()
        .ok_or_else(|| format!("missing parameter `{what}`"))
}

fn child_split(step: &Step) -> Result<usize, String> {
    let c = need(&step.params.child, "child")?;
    c.checked_sub(1)
        .ok_or_else(|| "child indices are 1-based".to_string())
}

/// Splits a head position into (anchor, splits) for rules whose pattern is
/// anchored `up` levels above the head.
fn anchored(head: &Position, up: usize) -> Result<(Position, Vec<usize>), String> {
    if head.len() < up {
        return Err(format!("head {head} is too shallow"));
    }
    let anchor = Position(head.0[..head.len() - up].to_vec());
    let splits = head.0[head.len() - up..].iter().map(|i| i - 1).collect();
    if head.0.contains(&0) {
        return Err("positions are 1-based".into());
    }
    Ok((anchor, splits))
}

/// Replays one step, returning the rewritten term.
pub fn replay_step(t: &Term, step: &Step, prec: &Precedence, mode: Mode) -> Result<Term, String> {
    if !rules_of(mode).contains(&step.rule) {
        return Err(format!(
            "rule {} is not part of the {mode} rule set",
            step.rule
        ));
    }
    let sc = schemas();
    let p = &step.position;
    let params = &step.params;
    let apply = |schema: &RuleSchema, at: &Position, sp: SchemaParams| {
        schema.apply_at(t, at, &sp, prec).map_err(|e| e.to_string())
    };
    let base = SchemaParams::default();
    match (mode, step.rule) {
        (Mode::Star, Rule::Put) => apply(&sc.star[0], p, base),
        (Mode::Omega, Rule::Put) => apply(
            &sc.omega[0],
            p,
            base.energy("n", need(&params.energy, "energy")?),
        ),
        (Mode::Star | Mode::Omega, Rule::Select) => {
            let s = if mode == Mode::Star {
                &sc.star[1]
            } else {
                &sc.omega[1]
            };
            apply(s, p, base.split(child_split(step)?))
        }
        (Mode::Star | Mode::Omega, Rule::Copy) => {
            let s = if mode == Mode::Star {
                &sc.star[2]
            } else {
                &sc.omega[2]
            };
            apply(
                s,
                p,
                base.symbol("G", need(&params.symbol, "symbol")?)
                    .count("k", need(&params.count, "count")?),
            )
        }
        (Mode::Star | Mode::Omega, Rule::Down) => {
            let s = if mode == Mode::Star {
                &sc.star[3]
            } else {
                &sc.omega[3]
            };
            apply(
                s,
                p,
                base.split(child_split(step)?)
                    .count("k", need(&params.count, "count")?),
            )
        }
        (Mode::Embedding, Rule::Remove) => {
            apply(&sc.embedding[0], p, base.split(child_split(step)?))
        }
        (Mode::Embedding, Rule::Select) => {
            apply(&sc.embedding[1], p, base.split(child_split(step)?))
        }
        (Mode::Embedding, Rule::Decrease) => apply(
            &sc.embedding[2],
            p,
            base.symbol("G", need(&params.symbol, "symbol")?),
        ),
        (Mode::HydraPhase, Rule::Kp1) => {
            if p.len() != 1 {
                return Err("kp1 heads sit directly below the root".into());
            }
            let (at, splits) = anchored(p, 1)?;
            apply(&sc.kp1, &at, SchemaParams { splits, ..base })
        }
        (Mode::HydraPhase, Rule::Kp2 | Rule::Bh1) => {
            let (at, splits) = anchored(p, 2)?;
            let schema = if step.rule == Rule::Kp2 {
                &sc.kp2
            } else {
                &sc.bh1
            };
            apply(
                schema,
                &at,
                SchemaParams {
                    splits,
                    ..base.count("k", need(&params.count, "count")?)
                },
            )
        }
        (Mode::HydraPhase, Rule::Bh2) => {
            crate::hydra::bh::bh2_rewrite(t, p).map_err(|e| e.to_string())
        }
        (Mode::HydraPhase, Rule::Bh3) => {
            let (at, splits) = anchored(p, 1)?;
            apply(
                &sc.bh3,
                &at,
                SchemaParams {
                    splits,
                    ..base.symbol("K", need(&params.symbol, "symbol")?)
                },
            )
        }
        (Mode::HydraPhase, Rule::Chop) => {
            crate::hydra::sh::chop_rewrite(t, p, &need(&params.labels, "labels")?, prec)
                .map_err(|e| e.to_string())
        }
        (Mode::HydraPhase, Rule::Propagate) => {
            apply(&sc.propagate, p, base.split(child_split(step)?))
        }
        (Mode::HydraPhase, Rule::Widen) => apply(
            &sc.widen,
            p,
            base.split(child_split(step)?)
                .count("k", need(&params.count, "count")?),
        ),
        (Mode::HydraPhase, Rule::Lengthen) => apply(
            &sc.lengthen,
            p,
            base.symbol("M", need(&params.symbol, "symbol")?),
        ),
        (Mode::HydraPhase, Rule::Waive) => apply(&sc.waive, p, base),
        (m, r) => Err(format!("rule {r} is not part of the {m} rule set")),
    }
}

/// Replays `trace` and returns every intermediate term (start first, end last).
///
/// The replayed end must equal the claimed end as a term, except in star and
/// omega mode where equality of trees suffices.
pub fn validate_trace(
    trace: &Trace,
    prec: &Precedence,
    mode: Mode,
) -> Result<Vec<Term>, TraceError> {
    let mut terms = Vec::with_capacity(trace.steps.len() + 1);
    terms.push(trace.start.clone());
    for (index, step) in trace.steps.iter().enumerate() {
        if !rules_of(mode).contains(&step.rule) {
            return Err(TraceError::ForeignRule {
                rule: step.rule,
                mode: mode.to_string(),
            });
        }
        let cur = terms.last().expect("nonempty");
        let next =
            replay_step(cur, step, prec, mode).map_err(|reason| TraceError::StepMismatch {
                index,
                rule: step.rule,
                position: step.position.clone(),
                reason,
            })?;
        terms.push(next);
    }
    let last = terms.last().expect("nonempty");
    let same = match mode {
        Mode::Star | Mode::Omega | Mode::Embedding => tree_equal(last, &trace.end),
        Mode::HydraPhase => *last == trace.end,
    };
    if !same {
        return Err(TraceError::EndMismatch {
            expected: trace.end.to_string(),
            actual: last.to_string(),
        });
    }
    Ok(terms)
}

/// Replaces every energy by a plain star.
pub fn erase_energy(t: &Term) -> Term {
    t.map_markers(&|m| match m {
        Marker::Energy(_) => Marker::Star,
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn example_trace() -> Trace {
        let r = Position::root();
        Trace {
            start: t("1(0(?x))"),
            steps: vec![
                Step::put(r.clone()),
                Step::copy(r.clone(), "0".into(), 1),
                Step::copy(Position(vec![1]), "0".into(), 1),
                Step::down(Position(vec![1, 1]), 1, 1),
                Step::select(Position(vec![1, 1, 1]), 1),
            ],
            end: t("0(0(1(?x)))"),
        }
    }

    #[test]
    fn five_step_example_validates() {
        let prec = Precedence::chain(["1", "0"]);
        let terms = validate_trace(&example_trace(), &prec, Mode::Star).unwrap();
        let shown: Vec<String> = terms.iter().map(|x| x.to_string()).collect();
        assert_eq!(
            shown,
            [
                "1(0(?x))",
                "1*(0(?x))",
                "0(1*(0(?x)))",
                "0(0(1*(0(?x))))",
                "0(0(1(0*(?x))))",
                "0(0(1(?x)))"
            ]
        );
    }

    #[test]
    fn empty_trace_validates_when_endpoints_agree() {
        let tr = Trace::empty(t("f(a)"));
        assert!(validate_trace(&tr, &Precedence::empty(), Mode::Star).is_ok());
        let bad = Trace {
            end: t("a"),
            ..Trace::empty(t("f(a)"))
        };
        assert!(matches!(
            validate_trace(&bad, &Precedence::empty(), Mode::Star),
            Err(TraceError::EndMismatch { .. })
        ));
    }

    #[test]
    fn reordered_steps_are_rejected() {
        let prec = Precedence::chain(["1", "0"]);
        let mut tr = example_trace();
        tr.steps.swap(0, 1);
        match validate_trace(&tr, &prec, Mode::Star) {
            Err(TraceError::StepMismatch { index, rule, .. }) => {
                assert_eq!(index, 0);
                assert_eq!(rule, Rule::Copy);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn foreign_rules_are_rejected() {
        let tr = Trace {
            start: t("f(a)"),
            steps: vec![Step::new(Rule::Remove, Position::root()).child(1)],
            end: t("f"),
        };
        assert!(matches!(
            validate_trace(&tr, &Precedence::empty(), Mode::Star),
            Err(TraceError::ForeignRule { .. })
        ));
        assert!(validate_trace(&tr, &Precedence::empty(), Mode::Embedding).is_ok());
    }

    #[test]
    fn steps_serialize_as_rule_position_params() {
        let v = serde_json::to_value(Step::copy(Position(vec![1, 2]), "h".into(), 2)).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"rule": "copy", "position": [1, 2], "params": {"count": 2, "symbol": "h"}})
        );
        let back: Step = serde_json::from_value(v).unwrap();
        assert_eq!(back, Step::copy(Position(vec![1, 2]), "h".into(), 2));
        let tr = example_trace();
        let json = serde_json::to_string(&tr).unwrap();
        assert_eq!(serde_json::from_str::<Trace>(&json).unwrap(), tr);
    }

    #[test]
    fn hydra_phase_rules_replay() {
        let e = Precedence::empty();
        let kp2 = Step::new(Rule::Kp2, Position(vec![1, 2])).count(2);
        assert_eq!(
            replay_step(&t("dagger(0(0,0))"), &kp2, &e, Mode::HydraPhase).unwrap(),
            t("dagger(0(0),0(0))")
        );
        let kp1 = Step::new(Rule::Kp1, Position(vec![1]));
        assert_eq!(
            replay_step(&t("dagger(0,0(0))"), &kp1, &e, Mode::HydraPhase).unwrap(),
            t("dagger(0(0))")
        );
        let bh3 = Step::new(Rule::Bh3, Position(vec![1, 1])).symbol("3".into());
        assert_eq!(
            replay_step(&t("dagger(0(omega))"), &bh3, &e, Mode::HydraPhase).unwrap(),
            t("dagger(0(3))")
        );
        let bad = Step::new(Rule::Bh3, Position(vec![1, 1])).symbol("x".into());
        assert!(replay_step(&t("dagger(0(omega))"), &bad, &e, Mode::HydraPhase).is_err());
    }
}
