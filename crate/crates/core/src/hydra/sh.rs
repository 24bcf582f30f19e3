//! Star Hydra steps (chop, propagate, widen/lengthen, waive) and their
//! compilation into star-game certificates via garbage children.

use serde::{Deserialize, Serialize};

use super::{head_rule, HydraError, HydraState, Variant};
use crate::precedence::Precedence;
use crate::term::{Marker, Position, Symbol, Term};
use crate::trace::{replay_step, validate_trace, Mode, Rule, Step, Trace};

/// The chopped head: child `child` (1-based) of `parent`, regrown as the
/// underlined leaves `betas`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShChop {
    pub parent: Position,
    pub child: usize,
    pub betas: Vec<Symbol>,
}

impl ShChop {
    pub fn at_leaf(leaf: &Position, betas: Vec<Symbol>) -> Option<ShChop> {
        Some(ShChop {
            parent: leaf.parent()?,
            child: leaf.last()?,
            betas,
        })
    }

    pub fn leaf(&self) -> Position {
        self.parent.child(self.child)
    }
}

/// One move of the Hydra's response, with positions in the underlined tree
/// current at the time of the move.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "move", rename_all = "lowercase")]
pub enum ShMove {
    /// Replace underlined child `child` of the underlined node at `position`
    /// by `count` copies of itself.
    Widen {
        position: Position,
        child: usize,
        count: usize,
    },
    /// Put a fresh underlined node labelled `label` above `position`.
    Lengthen { position: Position, label: Symbol },
}

impl ShMove {
    pub fn step(&self) -> Step {
        match self {
            ShMove::Widen {
                position,
                child,
                count,
            } => Step::new(Rule::Widen, position.clone())
                .child(*child)
                .count(*count),
            ShMove::Lengthen { position, label } => {
                Step::new(Rule::Lengthen, position.clone()).symbol(label.clone())
            }
        }
    }

    fn label(&self) -> Option<&Symbol> {
        match self {
            ShMove::Lengthen { label, .. } => Some(label),
            ShMove::Widen { .. } => None,
        }
    }
}

/// Everything needed to replay one Star Hydra step phase by phase.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseLog {
    pub chop: ShChop,
    /// Nodes underlined by propagation, bottom-up.
    pub propagate_path: Vec<Position>,
    pub moves: Vec<ShMove>,
    /// Nodes whose underline is waived at the end, in preorder.
    pub waive: Vec<Position>,
}

impl PhaseLog {
    /// The step as a hydra-phase trace: one chop step, the propagation
    /// steps, the response moves and the waive steps.
    pub fn phase_trace(&self, pre: &Term) -> Result<Trace, HydraError> {
        let mut steps =
            vec![Step::new(Rule::Chop, self.chop.leaf()).labels(self.chop.betas.clone())];
        let mut below = &self.chop.parent;
        for p in &self.propagate_path {
            let child = below
                .last()
                .ok_or_else(|| HydraError::LogReplay("propagation above the root".into()))?;
            steps.push(Step::new(Rule::Propagate, p.clone()).child(child));
            below = p;
        }
        steps.extend(self.moves.iter().map(ShMove::step));
        steps.extend(self.waive.iter().map(|p| Step::new(Rule::Waive, p.clone())));
        let prec = sh_precedence(pre, self);
        let mut cur = pre.clone();
        for (i, s) in steps.iter().enumerate() {
            cur = replay_step(&cur, s, &prec, Mode::HydraPhase)
                .map_err(|e| HydraError::LogReplay(format!("step {i} ({s}): {e}")))?;
        }
        Ok(Trace {
            start: pre.clone(),
            steps,
            end: cur,
        })
    }

    /// The intermediate trees after chop, after propagation, after each
    /// response move and after waiving, labelled by phase.
    pub fn phases(&self, pre: &Term) -> Result<Vec<(&'static str, Term)>, HydraError> {
        let trace = self.phase_trace(pre)?;
        let prec = sh_precedence(pre, self);
        let terms = validate_trace(&trace, &prec, Mode::HydraPhase)
            .map_err(|e| HydraError::LogReplay(e.to_string()))?;
        let mut out = vec![("chop", terms[1].clone())];
        let mut i = 1 + self.propagate_path.len();
        out.push(("propagate", terms[i].clone()));
        for m in &self.moves {
            i += 1;
            let name = match m {
                ShMove::Widen { .. } => "widen",
                ShMove::Lengthen { .. } => "lengthen",
            };
            out.push((name, terms[i].clone()));
        }
        out.push(("waive", terms.last().expect("nonempty").clone()));
        Ok(out)
    }
}

/// The natural order on every label a step can mention, with `bot` below.
pub fn sh_precedence(pre: &Term, log: &PhaseLog) -> Precedence {
    let mut symbols = pre.symbols();
    symbols.extend(log.chop.betas.iter().cloned());
    symbols.extend(log.moves.iter().filter_map(ShMove::label).cloned());
    symbols.push(Symbol::bot());
    Precedence::numeric(&symbols)
}

/// Replaces the leaf at `p` by the underlined leaves `labels`, each below
/// the leaf's label, and underlines the parent.
pub fn chop_rewrite(
    t: &Term,
    p: &Position,
    labels: &[Symbol],
    prec: &Precedence,
) -> Result<Term, HydraError> {
    let illegal = |m: String| HydraError::IllegalMove(m);
    let leaf = t.subterm_at(p).map_err(|e| illegal(e.to_string()))?;
    let alpha = match leaf.as_node() {
        Some(n) if n.children.is_empty() && n.marker.is_none() => n.symbol.clone(),
        _ => return Err(illegal(format!("{p} is not an unmarked leaf"))),
    };
    if let Some(b) = labels.iter().find(|b| !prec.greater(&alpha, b)) {
        return Err(HydraError::SideCondition(format!(
            "regrown label {b} is not below {alpha}"
        )));
    }
    let (parent, i) = (
        p.parent()
            .ok_or_else(|| illegal("the root is not a head".into()))?,
        p.last().unwrap_or(0),
    );
    let mut out = t.clone();
    let node = out
        .subterm_at_mut(&parent)
        .map_err(|e| illegal(e.to_string()))?
        .as_node_mut()
        .expect("parent of a leaf is a node");
    if !node.marker.is_none() {
        return Err(illegal(format!("parent {parent} is already marked")));
    }
    node.marker = Marker::Underline;
    let regrown = labels
        .iter()
        .map(|b| Term::marked(b.clone(), Marker::Underline, vec![]));
    node.children.splice(i - 1..i, regrown);
    Ok(out)
}

/// The result of chop and propagation: the chop path underlined.
pub(crate) fn chop_and_propagate(
    tree: &Term,
    chop: &ShChop,
    prec: &Precedence,
) -> Result<(Term, Vec<Position>), HydraError> {
    let mut cur = chop_rewrite(tree, &chop.leaf(), &chop.betas, prec)?;
    let mut path = Vec::new();
    let mut p = chop.parent.clone();
    while let Some(up) = p.parent() {
        let n = cur
            .subterm_at_mut(&up)
            .expect("ancestor exists")
            .as_node_mut()
            .expect("node");
        n.marker = Marker::Underline;
        path.push(up.clone());
        p = up;
    }
    Ok((cur, path))
}

/// Preorder positions of underlined nodes.
pub(crate) fn underlined(t: &Term) -> Vec<Position> {
    t.positions()
        .into_iter()
        .filter(|p| {
            t.subterm_at(p)
                .map(|s| s.marker() == Marker::Underline)
                .unwrap_or(false)
        })
        .collect()
}

/// Applies one response move to an underlined tree.
pub(crate) fn apply_sh_move(t: &Term, m: &ShMove) -> Result<Term, HydraError> {
    let mut symbols = t.symbols();
    symbols.extend(m.label().cloned());
    let prec = Precedence::numeric(&symbols);
    replay_step(t, &m.step(), &prec, Mode::HydraPhase)
        .map_err(|e| HydraError::SideCondition(format!("{m:?}: {e}")))
}

/// One full Star Hydra step with an explicit response.
pub fn sh_step(
    state: &HydraState,
    chop: &ShChop,
    response: &[ShMove],
) -> Result<(HydraState, PhaseLog), HydraError> {
    if state.variant != Variant::Sh {
        return Err(HydraError::IllegalMove(format!(
            "sh_step on a {} hydra",
            state.variant
        )));
    }
    head_rule(state, &chop.leaf())?;
    let mut symbols = state.tree.symbols();
    symbols.extend(chop.betas.iter().cloned());
    let prec = Precedence::numeric(&symbols);
    let (mut cur, propagate_path) = chop_and_propagate(&state.tree, chop, &prec)?;
    for m in response {
        cur = apply_sh_move(&cur, m)?;
    }
    let waive = underlined(&cur);
    let post = cur.strip_markers();
    let log = PhaseLog {
        chop: chop.clone(),
        propagate_path,
        moves: response.to_vec(),
        waive,
    };
    Ok((state.advance(post)?, log))
}

/// Garbage flags mirroring the shape of the term being rewritten.
#[derive(Clone, Debug)]
struct Shadow {
    garbage: bool,
    children: Vec<Shadow>,
}

impl Shadow {
    fn of(t: &Term) -> Shadow {
        Shadow {
            garbage: false,
            children: t.children().iter().map(Shadow::of).collect(),
        }
    }

    fn at_mut(&mut self, p: &Position) -> &mut Shadow {
        p.0.iter().fold(self, |s, &i| &mut s.children[i - 1])
    }

    fn at(&self, p: &Position) -> &Shadow {
        p.0.iter().fold(self, |s, &i| &s.children[i - 1])
    }

    /// Star-side index of the `j`-th (1-based) real child.
    fn real_index(&self, j: usize) -> Option<usize> {
        self.children
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.garbage)
            .nth(j.checked_sub(1)?)
            .map(|(i, _)| i + 1)
    }

    fn last_garbage(&self) -> Option<usize> {
        self.children.iter().rposition(|c| c.garbage).map(|i| i + 1)
    }

    fn first_garbage(&self, here: &Position) -> Option<Position> {
        for (i, c) in self.children.iter().enumerate() {
            let p = here.child(i + 1);
            if c.garbage {
                return Some(p);
            }
            if let Some(q) = c.first_garbage(&p) {
                return Some(q);
            }
        }
        None
    }
}

/// Emits star steps while tracking which subtrees are garbage.
struct GarbageEmitter {
    cur: Term,
    shadow: Shadow,
    steps: Vec<Step>,
    prec: Precedence,
}

impl GarbageEmitter {
    fn emit(&mut self, step: Step) -> Result<(), HydraError> {
        self.cur = replay_step(&self.cur, &step, &self.prec, Mode::Star)
            .map_err(|e| HydraError::Certificate(format!("{step}: {e}")))?;
        let p = &step.position;
        match step.rule {
            Rule::Select => {
                let child = self.shadow.at(p).children
                    [step.params.child.expect("select child") - 1]
                    .clone();
                *self.shadow.at_mut(p) = child;
            }
            Rule::Copy => {
                let old = self.shadow.at(p).clone();
                let k = step.params.count.expect("copy count");
                *self.shadow.at_mut(p) = Shadow {
                    garbage: old.garbage,
                    children: vec![
                        Shadow {
                            garbage: false,
                            ..old
                        };
                        k
                    ],
                };
            }
            Rule::Down => {
                let i = step.params.child.expect("down child") - 1;
                let k = step.params.count.expect("down count");
                let node = self.shadow.at_mut(p);
                let c = node.children[i].clone();
                node.children.splice(i..=i, std::iter::repeat_n(c, k));
            }
            _ => {}
        }
        self.steps.push(step);
        Ok(())
    }

    fn mark_garbage(&mut self, p: &Position) {
        self.shadow.at_mut(p).garbage = true;
    }

    /// Star-side position of a node given by its position in the
    /// garbage-free tree.
    fn locate(&self, p: &Position) -> Result<Position, HydraError> {
        let mut s = &self.shadow;
        let mut out = Position::root();
        for &j in &p.0 {
            let i = s.real_index(j).ok_or_else(|| {
                HydraError::LogReplay(format!("no real child {j} on the way to {p}"))
            })?;
            out = out.child(i);
            s = &s.children[i - 1];
        }
        Ok(out)
    }

    /// Removes one garbage child of the starred node at `p`, unstarring it.
    fn consume_garbage(&mut self, p: &Position) -> Result<(), HydraError> {
        let gi =
            self.shadow.at(p).last_garbage().ok_or_else(|| {
                HydraError::Certificate(format!("garbage budget exhausted at {p}"))
            })?;
        self.emit(Step::down(p.clone(), gi, 0))
    }

    /// Turns the starred subtree at `p` into a `bot` leaf marked as garbage.
    fn trash(&mut self, p: &Position) -> Result<(), HydraError> {
        self.emit(Step::copy(p.clone(), Symbol::bot(), 0))?;
        self.mark_garbage(p);
        Ok(())
    }
}

/// Compiles one Star Hydra step into a star-mode trace over the labels
/// extended by `bot`. Every underlined node carries spare garbage children
/// whose removal pays for erasing the star of each response move.
pub fn compile_sh_step_to_star(pre: &Term, log: &PhaseLog) -> Result<Trace, HydraError> {
    let state = HydraState::new(Variant::Sh, pre.clone())?;
    let (post, _) = sh_step(&state, &log.chop, &log.moves)?;
    let prec = sh_precedence(pre, log);
    let mut e = GarbageEmitter {
        cur: pre.clone(),
        shadow: Shadow::of(pre),
        steps: Vec::new(),
        prec: prec.clone(),
    };
    let mut budget = log.moves.len() + 1;

    // Chop: thread `budget` garbage copies down the path to the head.
    e.emit(Step::put(Position::root()))?;
    let path = &log.chop.parent.0;
    let mut at = Position::root();
    for &c in path {
        e.emit(Step::down(at.clone(), c, budget + 1))?;
        for j in 1..=budget {
            e.trash(&at.child(c + j))?;
        }
        at = at.child(c);
    }
    let c = log.chop.child;
    let k = log.chop.betas.len();
    e.emit(Step::down(at.clone(), c, k + budget))?;
    for (j, beta) in log.chop.betas.iter().enumerate() {
        let b = at.child(c + j);
        e.emit(Step::copy(b.clone(), beta.clone(), budget))?;
        for l in 1..=budget {
            e.trash(&b.child(l))?;
        }
    }
    for j in k..k + budget {
        e.trash(&at.child(c + j))?;
    }

    for m in &log.moves {
        match m {
            ShMove::Widen {
                position,
                child,
                count,
            } => {
                let q = e.locate(position)?;
                let ci = e.shadow.at(&q).real_index(*child).ok_or_else(|| {
                    HydraError::LogReplay(format!("widen at {position}: no child {child}"))
                })?;
                e.emit(Step::put(q.clone()))?;
                e.emit(Step::down(q.clone(), ci, *count))?;
                for j in 0..*count {
                    e.consume_garbage(&q.child(ci + j))?;
                }
            }
            ShMove::Lengthen { position, label } => {
                let q = e.locate(position)?;
                e.emit(Step::put(q.clone()))?;
                e.emit(Step::copy(q.clone(), label.clone(), budget))?;
                for j in 1..=budget {
                    e.consume_garbage(&q.child(j))?;
                }
                for j in 2..=budget {
                    e.mark_garbage(&q.child(j));
                }
            }
        }
        budget -= 1;
    }

    // Waive: prune every remaining garbage subtree from its parent.
    while let Some(g) = e.shadow.first_garbage(&Position::root()) {
        let parent = g.parent().expect("the root is never garbage");
        e.emit(Step::put(parent.clone()))?;
        e.emit(Step::down(parent, g.last().expect("proper position"), 0))?;
    }

    let trace = Trace {
        start: pre.clone(),
        steps: e.steps,
        end: post.tree,
    };
    validate_trace(&trace, &prec, Mode::Star)
        .map_err(|e| HydraError::Certificate(e.to_string()))?;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;
    use crate::tree::tree_equal;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn nat(n: u64) -> Symbol {
        Symbol::natural(n)
    }

    fn recorded_step() -> (HydraState, ShChop, Vec<ShMove>) {
        let s = HydraState::new(Variant::Sh, t("4(2,3(6,5))")).unwrap();
        let chop = ShChop::at_leaf(&Position(vec![2, 2]), vec![nat(4), nat(4)]).unwrap();
        let moves = vec![
            ShMove::Lengthen {
                position: Position::root(),
                label: nat(2),
            },
            ShMove::Lengthen {
                position: Position(vec![1, 2, 2]),
                label: nat(3),
            },
            ShMove::Widen {
                position: Position(vec![1]),
                child: 2,
                count: 2,
            },
        ];
        (s, chop, moves)
    }

    #[test]
    fn chop_then_propagate() {
        let prec = Precedence::numeric(&[nat(5), nat(4)]);
        let chop = ShChop::at_leaf(&Position(vec![2, 2]), vec![nat(4), nat(4)]).unwrap();
        let (u, path) = chop_and_propagate(&t("4(2,3(6,5))"), &chop, &prec).unwrap();
        assert_eq!(u, t("4_(2,3_(6,4_,4_))"));
        assert_eq!(path, vec![Position::root()]);
    }

    #[test]
    fn recorded_response_regrows() {
        let (s, chop, moves) = recorded_step();
        let (post, log) = sh_step(&s, &chop, &moves).unwrap();
        assert_eq!(post.tree, t("2(4(2,3(6,3(4),4),3(6,3(4),4)))"));
        let phases = log.phases(&s.tree).unwrap();
        assert_eq!(phases[1].1, t("4_(2,3_(6,4_,4_))"));
        assert_eq!(phases[2].1, t("2_(4_(2,3_(6,4_,4_)))"));
        assert_eq!(phases[3].1, t("2_(4_(2,3_(6,3_(4_),4_)))"));
        assert!(phases.last().unwrap().1.is_unmarked());
        let cert = compile_sh_step_to_star(&s.tree, &log).unwrap();
        assert!(tree_equal(&cert.end, &post.tree));
    }

    #[test]
    fn empty_chop() {
        let s = HydraState::new(Variant::Sh, t("1(0)")).unwrap();
        let chop = ShChop::at_leaf(&Position(vec![1]), vec![]).unwrap();
        let (post, log) = sh_step(&s, &chop, &[]).unwrap();
        assert_eq!(post.tree, t("1"));
        assert!(post.slain);
        let cert = compile_sh_step_to_star(&s.tree, &log).unwrap();
        assert_eq!(
            cert.rules(),
            vec![Rule::Put, Rule::Down, Rule::Copy, Rule::Put, Rule::Down]
        );
    }

    #[test]
    fn side_conditions() {
        let s = HydraState::new(Variant::Sh, t("1(2)")).unwrap();
        let chop = ShChop::at_leaf(&Position(vec![1]), vec![nat(2)]).unwrap();
        assert!(matches!(
            sh_step(&s, &chop, &[]),
            Err(HydraError::SideCondition(_))
        ));
        let chop = ShChop::at_leaf(&Position(vec![1]), vec![nat(1)]).unwrap();
        let up = ShMove::Lengthen {
            position: Position::root(),
            label: nat(1),
        };
        assert!(matches!(
            sh_step(&s, &chop, &[up]),
            Err(HydraError::SideCondition(_))
        ));
        let bad_widen = ShMove::Widen {
            position: Position::root(),
            child: 1,
            count: 3,
        };
        // The regrown 1 is underlined, so widening it is legal.
        assert!(sh_step(&s, &chop, &[bad_widen]).is_ok());
    }
}
