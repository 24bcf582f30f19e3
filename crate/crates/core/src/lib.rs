//! Star games on unranked trees.
//!
//! The crate is organised in layers:
//!
//! - [`term`], [`syntax`], [`tree`], [`schema`]: terms, their concrete syntax,
//!   trees as terms modulo sibling permutation, and rule schemas with
//!   argument vectors.
//! - [`trace`]: certificates and their validator, shared by everything else.
//! - [`star`]: the put/select/copy/down rules, the energized variant, reduction
//!   search, the recursive path order oracle with certificate emission, and
//!   symbol tracing.
//! - [`embedding`]: homeomorphic embedding with witnesses and its compilation
//!   into star reductions.
//! - [`hydra`]: Kirby-Paris, Buchholz and Star Hydra battles, policies, and
//!   compilers from battle steps to star certificates.

pub mod embedding;
pub mod error;
pub mod hydra;
pub mod precedence;
pub mod schema;
pub mod star;
pub mod syntax;
pub mod term;
pub mod trace;
pub mod tree;

pub use error::{PrecedenceError, SchemaError, TermError, TraceError};
pub use precedence::Precedence;
pub use syntax::{format_term, parse_precedence, parse_term, parse_trs, RewriteRule};
pub use term::{Marker, Position, Substitution, Symbol, Term};
pub use trace::{validate_trace, Mode, Rule, Step, StepParams, Trace};
pub use tree::{canonicalize, tree_equal};
