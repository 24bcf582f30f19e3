//! The energized star rules: stars carry a natural number that pays for moves.

use thiserror::Error;

use crate::error::TraceError;
use crate::precedence::Precedence;
use crate::star::successors::{successors, Energies};
use crate::term::Term;
use crate::trace::{validate_trace, Mode, Rule, Step, Trace};

/// One-step energized reducts. Put assigns any energy up to `max_energy`;
/// select, copy and down need energy `n + 1` and leave energy `n` behind.
pub fn omega_successors(
    t: &Term,
    prec: &Precedence,
    max_copies: usize,
    max_energy: u32,
) -> Vec<(Step, Term)> {
    successors(t, prec, max_copies, Energies::Upto(max_energy))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiftError {
    #[error("only traces between unmarked trees can be lifted")]
    MarkedEndpoint,
    #[error("input is not a star-mode trace: {0}")]
    NotStar(TraceError),
    #[error("lifted trace does not validate: {0}")]
    Lifted(TraceError),
}

/// Gives every put the number of steps remaining after it as energy.
pub fn lift_energy(trace: &Trace, prec: &Precedence) -> Result<Trace, LiftError> {
    if !trace.start.is_unmarked() || !trace.end.is_unmarked() {
        return Err(LiftError::MarkedEndpoint);
    }
    validate_trace(trace, prec, Mode::Star).map_err(LiftError::NotStar)?;
    let n = trace.steps.len();
    let steps = trace
        .steps
        .iter()
        .enumerate()
        .map(|(i, st)| {
            let mut st = st.clone();
            if st.rule == Rule::Put {
                st.params.energy = Some((n - i - 1) as u32);
            }
            st
        })
        .collect();
    let lifted = Trace {
        start: trace.start.clone(),
        steps,
        end: trace.end.clone(),
    };
    validate_trace(&lifted, prec, Mode::Omega).map_err(LiftError::Lifted)?;
    Ok(lifted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::star::certificate_from_mpo;
    use crate::syntax::parse_term;
    use crate::term::Marker;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn put_assigns_energy() {
        let succ = omega_successors(&t("1(0(?x))"), &Precedence::chain(["1", "0"]), 2, 4);
        assert!(succ.iter().any(|(_, u)| *u == t("1^4(0(?x))")));
    }

    #[test]
    fn energy_zero_is_stuck_at_the_root() {
        let succ = omega_successors(&t("f^0(a,b)"), &Precedence::empty(), 2, 2);
        assert!(succ
            .iter()
            .all(|(s, _)| s.rule == Rule::Put && !s.position.is_root()));
        assert_eq!(succ.len(), 6);
    }

    #[test]
    fn energy_one_select_and_down() {
        let succ = omega_successors(&t("1^1(0)"), &Precedence::empty(), 0, 0);
        let reducts: Vec<String> = succ.iter().map(|(_, u)| u.to_string()).collect();
        assert_eq!(reducts, ["0", "1", "1^1(0^0)"]);
    }

    #[test]
    fn distributivity_energies() {
        let prec = Precedence::chain(["1", "0"]);
        let tr = certificate_from_mpo(&t("1(0(?x))"), &t("0(0(1(?x)))"), &prec).unwrap();
        let lifted = lift_energy(&tr, &prec).unwrap();
        assert_eq!(lifted.steps[0].params.energy, Some(4));
        let terms = validate_trace(&lifted, &prec, Mode::Omega).unwrap();
        let energies: Vec<u32> = terms
            .iter()
            .flat_map(|u| {
                let mut es = Vec::new();
                u.visit(&mut |n| {
                    if let Marker::Energy(e) = n.marker() {
                        es.push(e)
                    }
                });
                es
            })
            .collect();
        assert_eq!(energies, [4, 3, 2, 1]);
        assert_eq!(crate::trace::erase_energy(&terms[1]), t("1*(0(?x))"));
    }

    #[test]
    fn empty_trace_lifts_to_itself() {
        let tr = Trace::empty(t("f(a)"));
        assert_eq!(lift_energy(&tr, &Precedence::empty()).unwrap(), tr);
    }
}
