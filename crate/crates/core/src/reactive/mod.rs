//! A reactive layer over the dataspace: scripts that block on `state`
//! forms, facets that keep assertions in sync with collected values, and a
//! per-actor multiplexer that keeps concurrent groups from interfering.

mod actor;
mod group;
mod mux;
mod scope;
mod script;
mod spec;

use thiserror::Error;

use crate::error::PatternError;
use crate::value::Pattern;

pub use actor::{reactive_actor, ReactiveActor};
pub use group::{GroupOutcome, StateGroup};
pub use mux::Mux;
pub use scope::{Cx, Scope};
pub use script::Script;
pub use spec::{EventSpec, StateSpec};

/// Label of the record a state's hosting actor uses to hand results back to
/// the script that entered it. User patterns and asserted values may not
/// mention it.
pub const STATE_RESULT_LABEL: &str = "state-result";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReactiveError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("variable `{name}` is not a {expected}: {found}")]
    WrongType {
        name: String,
        expected: &'static str,
        found: Pattern,
    },
    #[error("body returned {found} values for {expected} collected bindings")]
    FoldArity { expected: usize, found: usize },
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("label `{0}` is reserved")]
    ReservedLabel(String),
    #[error("collected binding `{0}` declared twice")]
    DuplicateCollect(String),
    #[error("state returned {found} values for {expected} result names")]
    ResultArity { expected: usize, found: usize },
    #[error("{0}")]
    Body(String),
}
