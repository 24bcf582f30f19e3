use thiserror::Error;

use crate::term::{Position, Symbol};
use crate::trace::Rule;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("invalid position {0}")]
    InvalidPosition(Position),
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("variable ?{0} cannot carry a marker")]
    MarkerOnVariable(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("pattern does not match: {0}")]
    NoMatch(String),
    #[error("parameter out of range: {0}")]
    ParamsOutOfRange(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrecedenceError {
    #[error("precedence is cyclic: {0} > ... > {0}")]
    Cyclic(Symbol),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("step {index} ({rule} at {position}) does not replay: {reason}")]
    StepMismatch {
        index: usize,
        rule: Rule,
        position: Position,
        reason: String,
    },
    #[error("replay ends in {actual}, trace claims {expected}")]
    EndMismatch { expected: String, actual: String },
    #[error("rule {rule} is not part of the {mode} rule set")]
    ForeignRule { rule: Rule, mode: String },
}
