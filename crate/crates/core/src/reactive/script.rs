use std::collections::VecDeque;

use super::actor::ReactiveActor;
use super::scope::{Cx, Scope};
use super::spec::StateSpec;
use super::ReactiveError;
use crate::network::Spawn;
use crate::value::Pattern;

pub(crate) type SendExpr = Box<dyn FnOnce(&Scope) -> Result<Pattern, ReactiveError>>;
pub(crate) type Effect = Box<dyn FnOnce(&mut Cx) -> Result<(), ReactiveError>>;
pub(crate) type StateBuilder = Box<dyn FnOnce(&Scope) -> Result<StateSpec, ReactiveError>>;

pub(crate) enum ScriptStep {
    Send(SendExpr),
    Run(Effect),
    /// Blocking `state`: runs in a fresh actor, results bound on return.
    State {
        results: Vec<String>,
        build: StateBuilder,
    },
    /// Install a state group in this very actor and wait for it.
    Host {
        results: Vec<String>,
        spec: StateSpec,
    },
}

/// The body of an `actor` form: steps executed in order, suspending at each
/// blocking `state`.
#[derive(Default)]
pub struct Script {
    pub(crate) steps: VecDeque<ScriptStep>,
}

impl Script {
    pub fn new() -> Self {
        Self::default()
    }

    /// `send!` of a fixed message.
    pub fn send(self, body: Pattern) -> Self {
        self.send_with(move |_| Ok(body))
    }

    /// `send!` of a message computed from the script's bindings.
    pub fn send_with(
        mut self,
        expr: impl FnOnce(&Scope) -> Result<Pattern, ReactiveError> + 'static,
    ) -> Self {
        self.steps.push_back(ScriptStep::Send(Box::new(expr)));
        self
    }

    /// An arbitrary effect over the bindings.
    pub fn run(
        mut self,
        effect: impl FnOnce(&mut Cx) -> Result<(), ReactiveError> + 'static,
    ) -> Self {
        self.steps.push_back(ScriptStep::Run(Box::new(effect)));
        self
    }

    /// A blocking `state`; its result values are bound to `results`.
    pub fn state(self, results: &[&str], spec: StateSpec) -> Self {
        self.state_with(results, move |_| Ok(spec))
    }

    /// A blocking `state` built from the bindings in force when it is
    /// entered.
    pub fn state_with(
        mut self,
        results: &[&str],
        build: impl FnOnce(&Scope) -> Result<StateSpec, ReactiveError> + 'static,
    ) -> Self {
        self.steps.push_back(ScriptStep::State {
            results: results.iter().map(|s| s.to_string()).collect(),
            build: Box::new(build),
        });
        self
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// A spawn action creating an actor that runs this script.
    pub fn into_spawn(self) -> Spawn {
        ReactiveActor::new(self).into_spawn()
    }
}
