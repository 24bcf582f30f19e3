//! Star certificates read off the path order derivation.

use thiserror::Error;

use crate::error::TraceError;
use crate::precedence::Precedence;
use crate::star::mpo::{Mpo, Reason};
use crate::term::{Position, Term};
use crate::trace::{replay_step, validate_trace, Mode, Step, Trace};
use crate::tree::canonicalize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateError {
    #[error("{0} is not greater than {1} in the path order")]
    NotGreater(String, String),
    #[error("terms must be unmarked")]
    Marked,
    #[error("emitted certificate does not validate: {0}")]
    Invalid(#[from] TraceError),
}

/// A star-mode trace from `s` to a term tree-equal to `t`, built by structural
/// recursion on the order derivation of `s > t`.
pub fn certificate_from_mpo(
    s: &Term,
    t: &Term,
    prec: &Precedence,
) -> Result<Trace, CertificateError> {
    if !s.is_unmarked() || !t.is_unmarked() {
        return Err(CertificateError::Marked);
    }
    let tc = canonicalize(t);
    let mut mpo = Mpo::new(prec);
    if !mpo.greater(&canonicalize(s), &tc) {
        return Err(CertificateError::NotGreater(s.to_string(), t.to_string()));
    }
    let mut em = Emitter {
        prec,
        mpo,
        cur: s.clone(),
        steps: Vec::new(),
    };
    em.apply(Step::put(Position::root()));
    em.emit(&Position::root(), s, &tc);
    let trace = Trace {
        start: s.clone(),
        steps: em.steps,
        end: em.cur,
    };
    validate_trace(&trace, prec, Mode::Star)?;
    Ok(trace)
}

struct Emitter<'a> {
    prec: &'a Precedence,
    mpo: Mpo<'a>,
    cur: Term,
    steps: Vec<Step>,
}

impl Emitter<'_> {
    fn apply(&mut self, step: Step) {
        self.cur = replay_step(&self.cur, &step, self.prec, Mode::Star)
            .unwrap_or_else(|e| panic!("emitted step {step} does not apply to {}: {e}", self.cur));
        self.steps.push(step);
    }

    /// `cur|p` is `s` with a starred root, `s > t`, and `t` is canonical.
    fn emit(&mut self, p: &Position, s: &Term, t: &Term) {
        let children = s.children();
        let mut order: Vec<(Term, usize)> = children
            .iter()
            .enumerate()
            .map(|(i, c)| (canonicalize(c), i))
            .collect();
        order.sort();
        let perm: Vec<usize> = order.iter().map(|(_, i)| *i).collect();
        let cs = Term::marked(
            s.symbol().expect("node").clone(),
            crate::term::Marker::None,
            order.into_iter().map(|(c, _)| c).collect(),
        );
        let reason = self
            .mpo
            .reason(&cs, t)
            .expect("emit is only called on greater pairs");
        match reason {
            Reason::SubtermEq(k) => self.apply(Step::select(p.clone(), perm[k] + 1)),
            Reason::Subterm(k) => {
                self.apply(Step::select(p.clone(), perm[k] + 1));
                self.apply(Step::put(p.clone()));
                self.emit(p, &children[perm[k]], t);
            }
            Reason::Precedence => {
                let g = t.symbol().expect("node").clone();
                let n = t.children().len();
                self.apply(Step::copy(p.clone(), g, n));
                for (j, tj) in t.children().iter().enumerate() {
                    self.emit(&p.child(j + 1), s, tj);
                }
            }
            Reason::Multiset { removed } => {
                let mut removed: Vec<(usize, Vec<usize>)> =
                    removed.into_iter().map(|(k, js)| (perm[k], js)).collect();
                removed.sort_by_key(|r| std::cmp::Reverse(r.0));
                for (n, (i, js)) in removed.into_iter().enumerate() {
                    if n > 0 {
                        self.apply(Step::put(p.clone()));
                    }
                    self.apply(Step::down(p.clone(), i + 1, js.len()));
                    for (c, j) in js.into_iter().enumerate() {
                        self.emit(&p.child(i + 1 + c), &children[i], &t.children()[j]);
                    }
                }
            }
        }
    }
}
