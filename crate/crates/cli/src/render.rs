//! Plain-text rendering of traces and witnesses.

use std::fmt::Write;

use starpath::embedding::EmbeddingWitness;
use starpath::{validate_trace, Mode, Precedence, Trace};

/// One line per step with the term it produces.
pub fn trace(tr: &Trace, prec: &Precedence, mode: Mode) -> String {
    let terms = validate_trace(tr, prec, mode).expect("printed traces are validated first");
    let mut out = format!("  start {}\n", tr.start);
    for (i, (step, t)) in tr.steps.iter().zip(&terms[1..]).enumerate() {
        let _ = writeln!(out, "  {:>3}. {:<32} {t}", i + 1, step.to_string());
    }
    out
}

pub fn mapping(w: &EmbeddingWitness) -> String {
    w.mapping
        .iter()
        .map(|(p, q)| format!("  {p} -> {q}\n"))
        .collect()
}
