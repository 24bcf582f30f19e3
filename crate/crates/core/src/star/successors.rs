//! One-step reducts under the star rules and their energized variant.

use crate::precedence::Precedence;
use crate::term::{Marker, Node, Position, Term};
use crate::trace::Step;

/// Marker discipline shared by the plain and the energized rule sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Energies {
    /// Plain stars.
    Plain,
    /// Energized stars; put may assign any energy up to the bound.
    Upto(u32),
}

/// All one-step reducts of `t`, with copy and down replication counts in
/// `0..=max_copies` and copy targets ranging over every symbol below the head.
pub fn star_successors(t: &Term, prec: &Precedence, max_copies: usize) -> Vec<(Step, Term)> {
    successors(t, prec, max_copies, Energies::Plain)
}

pub(crate) fn successors(
    t: &Term,
    prec: &Precedence,
    max_copies: usize,
    energies: Energies,
) -> Vec<(Step, Term)> {
    let mut out = Vec::new();
    for p in t.positions() {
        let sub = t.subterm_at(&p).expect("own position");
        let Some(node) = sub.as_node() else { continue };
        let mut emit = |step: Step, s: Term| {
            out.push((step, t.replace_at(&p, s).expect("own position")));
        };
        // (marker consumed by a rule, marker given to copies)
        let active = match (energies, node.marker) {
            (Energies::Plain, Marker::Star) => Some(Marker::Star),
            (Energies::Upto(_), Marker::Energy(n)) if n > 0 => Some(Marker::Energy(n - 1)),
            _ => None,
        };
        if node.marker.is_none() {
            match energies {
                Energies::Plain => emit(Step::put(p.clone()), sub.with_marker(Marker::Star)),
                Energies::Upto(max) => {
                    for n in 0..=max {
                        emit(
                            Step::put_energy(p.clone(), n),
                            sub.with_marker(Marker::Energy(n)),
                        );
                    }
                }
            }
            continue;
        }
        let Some(residual) = active else { continue };
        active_rules(&p, sub, residual, prec, max_copies, &mut emit);
    }
    out
}

/// Calls `f(p, s)` for every one-step reduct `t[s]_p`, without building the
/// whole reduct. Energies are handled as in [`successors`].
///
/// With `fuse` set (plain stars only), a put is never a step of its own: an
/// unmarked node instead takes a put immediately followed by a select, copy
/// or down at the same node. Any reduction between unmarked trees can be
/// rearranged into this form through trees of the same sizes: a put commutes
/// with every step outside its node's ancestors, copies of a starred subtree
/// can be starred after copying instead, and a put whose star is later
/// deleted can be dropped.
pub(crate) fn for_each_local_reduct(
    t: &Term,
    prec: &Precedence,
    max_copies: usize,
    energies: Energies,
    fuse: bool,
    f: &mut dyn FnMut(&Position, Term),
) {
    fn go(
        t: &Term,
        p: &mut Position,
        prec: &Precedence,
        max_copies: usize,
        energies: Energies,
        fuse: bool,
        f: &mut dyn FnMut(&Position, Term),
    ) {
        let Some(node) = t.as_node() else { return };
        let here = p.clone();
        let mut emit = |_: Step, s: Term| f(&here, s);
        match (energies, node.marker) {
            (Energies::Plain, Marker::None) if fuse => active_rules(
                &here,
                &t.with_marker(Marker::Star),
                Marker::Star,
                prec,
                max_copies,
                &mut emit,
            ),
            (Energies::Plain, Marker::None) => {
                emit(Step::put(here.clone()), t.with_marker(Marker::Star))
            }
            (Energies::Upto(max), Marker::None) => {
                for n in 0..=max {
                    emit(Step::put(here.clone()), t.with_marker(Marker::Energy(n)));
                }
            }
            (Energies::Plain, Marker::Star) => {
                active_rules(&here, t, Marker::Star, prec, max_copies, &mut emit)
            }
            (Energies::Upto(_), Marker::Energy(n)) if n > 0 => {
                active_rules(&here, t, Marker::Energy(n - 1), prec, max_copies, &mut emit)
            }
            _ => {}
        }
        for (i, c) in node.children.iter().enumerate() {
            p.0.push(i + 1);
            go(c, p, prec, max_copies, energies, fuse, f);
            p.0.pop();
        }
    }
    go(
        t,
        &mut Position::root(),
        prec,
        max_copies,
        energies,
        fuse,
        f,
    );
}

/// The select, copy and down reducts of the active node `sub` at `p`;
/// `residual` is the marker its copies receive.
fn active_rules(
    p: &Position,
    sub: &Term,
    residual: Marker,
    prec: &Precedence,
    max_copies: usize,
    emit: &mut dyn FnMut(Step, Term),
) {
    let node = sub.as_node().expect("active nodes are nodes");
    for (i, c) in node.children.iter().enumerate() {
        emit(Step::select(p.clone(), i + 1), c.clone());
    }
    let lowered = sub.with_marker(residual);
    for g in prec.smaller_than(&node.symbol) {
        for k in 0..=max_copies {
            emit(
                Step::copy(p.clone(), g.clone(), k),
                Term::app(g.clone(), vec![lowered.clone(); k]),
            );
        }
    }
    for (i, c) in node.children.iter().enumerate() {
        let Some(cn) = c.as_node() else { continue };
        if !cn.marker.is_none() {
            continue;
        }
        let marked_child = c.with_marker(residual);
        for k in 0..=max_copies {
            let mut children = node.children[..i].to_vec();
            children.extend(std::iter::repeat_n(marked_child.clone(), k));
            children.extend_from_slice(&node.children[i + 1..]);
            emit(
                Step::down(p.clone(), i + 1, k),
                Term::Node(Node {
                    symbol: node.symbol.clone(),
                    marker: Marker::None,
                    children,
                }),
            );
        }
    }
}

/// Every position of `t` carrying a star or an energy.
pub fn marked_positions(t: &Term) -> Vec<Position> {
    t.positions()
        .into_iter()
        .filter(|p| !t.subterm_at(p).expect("own position").marker().is_none())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;
    use crate::trace::{replay_step, Mode};
    use crate::tree::tree_equal;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn copy_reduct_after_root_put() {
        let prec = Precedence::chain(["f", "h"]);
        let s = t("f(a,g(b))");
        let after_put = star_successors(&s, &prec, 2)
            .into_iter()
            .find(|(st, _)| st.position.is_root())
            .unwrap()
            .1;
        assert_eq!(after_put, t("f*(a,g(b))"));
        let target = t("h(f*(a,g(b)),f*(a,g(b)))");
        assert!(star_successors(&after_put, &prec, 2)
            .iter()
            .any(|(_, u)| *u == target));
    }

    #[test]
    fn select_yields_each_child() {
        let succ = star_successors(&t("f*(a,b)"), &Precedence::empty(), 2);
        let at_root: Vec<&Term> = succ
            .iter()
            .filter(|(s, _)| s.position.is_root() && s.rule == crate::trace::Rule::Select)
            .map(|(_, u)| u)
            .collect();
        assert_eq!(at_root, [&t("a"), &t("b")]);
    }

    #[test]
    fn unmarked_leaf_only_puts() {
        let succ = star_successors(&t("a"), &Precedence::empty(), 3);
        assert_eq!(succ.len(), 1);
        assert_eq!(succ[0].1, t("a*"));
    }

    #[test]
    fn down_skips_variables_and_marked_children() {
        let succ = star_successors(&t("f*(?x,g*)"), &Precedence::empty(), 1);
        assert!(succ
            .iter()
            .all(|(s, _)| s.rule != crate::trace::Rule::Down || !s.position.is_root()));
    }

    #[test]
    fn every_successor_replays_through_the_schemas() {
        let prec = Precedence::chain(["2", "1", "0"]);
        for s in ["2*(1(0),?x)", "1(0*,2)", "2*(2*(0))"] {
            let s = t(s);
            for (step, u) in star_successors(&s, &prec, 2) {
                let r = replay_step(&s, &step, &prec, Mode::Star).unwrap();
                assert!(tree_equal(&r, &u) && r == u, "{step}");
            }
        }
    }

    #[test]
    fn energized_successors_replay() {
        let prec = Precedence::chain(["1", "0"]);
        for s in ["1^2(0,?x)", "1(0^1)", "0^0(1)"] {
            let s = t(s);
            for (step, u) in successors(&s, &prec, 2, Energies::Upto(2)) {
                assert_eq!(
                    replay_step(&s, &step, &prec, Mode::Omega).unwrap(),
                    u,
                    "{step}"
                );
            }
        }
    }
}
