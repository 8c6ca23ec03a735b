use std::collections::BTreeMap;
use std::ops::Deref;

use super::script::Script;
use super::spec::StateSpec;
use super::{actor::ReactiveActor, ReactiveError};
use crate::network::Action;
use crate::value::Pattern;

/// Named values visible to script steps, facet bodies and templates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Scope {
    vars: BTreeMap<String, Pattern>,
}

impl Scope {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Result<&Pattern, ReactiveError> {
        self.vars
            .get(name)
            .ok_or_else(|| ReactiveError::Unbound(name.to_string()))
    }

    pub fn int(&self, name: &str) -> Result<i64, ReactiveError> {
        let v = self.get(name)?;
        v.as_int().ok_or_else(|| wrong_type(name, "integer", v))
    }

    pub fn string(&self, name: &str) -> Result<&str, ReactiveError> {
        let v = self.get(name)?;
        v.as_str().ok_or_else(|| wrong_type(name, "string", v))
    }

    pub fn boolean(&self, name: &str) -> Result<bool, ReactiveError> {
        let v = self.get(name)?;
        v.as_bool().ok_or_else(|| wrong_type(name, "boolean", v))
    }

    pub fn set(&mut self, name: impl Into<String>, value: Pattern) {
        self.vars.insert(name.into(), value);
    }

    pub fn contains(&self, name: &str) -> bool {
        self.vars.contains_key(name)
    }

    pub(crate) fn bind_all<'a>(
        &mut self,
        names: impl IntoIterator<Item = &'a String>,
        values: impl IntoIterator<Item = Pattern>,
    ) {
        for (n, v) in names.into_iter().zip(values) {
            self.vars.insert(n.clone(), v);
        }
    }
}

fn wrong_type(name: &str, expected: &'static str, found: &Pattern) -> ReactiveError {
    ReactiveError::WrongType {
        name: name.to_string(),
        expected,
        found: found.clone(),
    }
}

/// What a facet body or script step can see and do: read bindings, send
/// messages and create actors. Blocking is not available here; a `state`
/// started from a body runs detached in its own actor.
pub struct Cx<'a> {
    scope: Scope,
    out: &'a mut Vec<Action>,
}

impl<'a> Cx<'a> {
    pub(crate) fn new(scope: Scope, out: &'a mut Vec<Action>) -> Self {
        Cx { scope, out }
    }

    pub(crate) fn into_scope(self) -> Scope {
        self.scope
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn set(&mut self, name: impl Into<String>, value: Pattern) {
        self.scope.set(name, value);
    }

    pub fn send(&mut self, body: Pattern) {
        self.out.push(Action::Message(body));
    }

    /// Creates a new reactive actor running `script`.
    pub fn spawn(&mut self, script: Script) {
        self.out.push(Action::Spawn(script.into_spawn()));
    }

    /// Runs `spec` in a new child actor seeded with the current bindings.
    /// The caller does not wait for it.
    pub fn detach(&mut self, spec: StateSpec) {
        self.detach_then(spec, &[], Script::new());
    }

    /// Like [`detach`](Self::detach), but once the state terminates the
    /// child binds its result values to `results` and runs `then`.
    pub fn detach_then(&mut self, spec: StateSpec, results: &[&str], then: Script) {
        let actor = ReactiveActor::hosting(
            spec,
            self.scope.clone(),
            results.iter().map(|s| s.to_string()).collect(),
            then,
            None,
        );
        self.out.push(Action::Spawn(actor.into_spawn()));
    }
}

impl Deref for Cx<'_> {
    type Target = Scope;

    fn deref(&self) -> &Scope {
        &self.scope
    }
}
