use std::collections::VecDeque;

use super::group::StateGroup;
use super::mux::Mux;
use super::scope::{Cx, Scope};
use super::script::{Script, ScriptStep};
use super::spec::StateSpec;
use super::{ReactiveError, STATE_RESULT_LABEL};
use crate::network::{Action, ActorId, Behaviour, Event, Network, Spawn, Step};
use crate::patch::AssertionSet;
use crate::value::Pattern;

/// `state-result(id, list(values...))`
pub(crate) fn state_result(id: Pattern, values: Vec<Pattern>) -> Pattern {
    Pattern::record(STATE_RESULT_LABEL, [id, Pattern::list(values)])
}

/// `observe(state-result(id, _))`
fn result_interest(id: Pattern) -> Pattern {
    Pattern::observe(Pattern::record(STATE_RESULT_LABEL, [id, Pattern::Wildcard]))
}

fn parse_state_result<'a>(a: &'a Pattern, id: &Pattern) -> Option<&'a [Pattern]> {
    match a {
        Pattern::Record { label, fields } if label == STATE_RESULT_LABEL && fields.len() == 2 => {
            (&fields[0] == id).then(|| fields[1].fields())
        }
        _ => None,
    }
}

struct Hosted {
    group: StateGroup,
    results: Vec<String>,
}

struct Waiting {
    id: Pattern,
    results: Vec<String>,
}

/// The behaviour of a reactive actor: a suspendable script plus the state
/// groups hosted in this actor, sharing one assertion multiplexer.
///
/// A blocking `state` entered from the script runs in a fresh child actor.
/// The child asserts `state-result(id, list(values...))` when one of its
/// termination clauses fires, then quits; the parent observes that record,
/// binds the values and carries on with its script.
pub struct ReactiveActor {
    me: ActorId,
    scope: Scope,
    steps: VecDeque<ScriptStep>,
    mux: Mux,
    own: AssertionSet,
    groups: Vec<Hosted>,
    waiting: Option<Waiting>,
    report_to: Option<Pattern>,
    next_state: u64,
    finished: bool,
}

impl ReactiveActor {
    pub fn new(script: Script) -> Self {
        ReactiveActor {
            me: ActorId::ground(),
            scope: Scope::new(),
            steps: script.steps,
            mux: Mux::new(),
            own: AssertionSet::new(),
            groups: Vec::new(),
            waiting: None,
            report_to: None,
            next_state: 0,
            finished: false,
        }
    }

    /// An actor that starts by hosting `spec` with the given bindings, then
    /// runs `then`. With `report_to`, the state's result is published as a
    /// `state-result` assertion instead.
    pub(crate) fn hosting(
        spec: StateSpec,
        scope: Scope,
        results: Vec<String>,
        then: Script,
        report_to: Option<Pattern>,
    ) -> Self {
        let mut steps = then.steps;
        steps.push_front(ScriptStep::Host { results, spec });
        ReactiveActor {
            scope,
            steps,
            report_to,
            ..ReactiveActor::new(Script::new())
        }
    }

    pub fn into_spawn(self) -> Spawn {
        Spawn::leaf(Box::new(self), Vec::new())
    }

    fn claim(&mut self, a: Pattern, out: &mut Vec<Action>) {
        let mut next = self.own.clone();
        next.insert(a);
        self.replace_own(next, out);
    }

    fn release(&mut self, a: &Pattern, out: &mut Vec<Action>) {
        let mut next = self.own.clone();
        next.remove(a);
        self.replace_own(next, out);
    }

    fn replace_own(&mut self, next: AssertionSet, out: &mut Vec<Action>) {
        let patch = self.mux.update(&self.own, &next);
        self.own = next;
        if !patch.is_empty() {
            out.push(Action::Patch(patch));
        }
    }

    fn bind_results(
        &mut self,
        names: &[String],
        values: Vec<Pattern>,
    ) -> Result<(), ReactiveError> {
        if names.is_empty() {
            return Ok(());
        }
        if names.len() != values.len() {
            return Err(ReactiveError::ResultArity {
                expected: names.len(),
                found: values.len(),
            });
        }
        self.scope.bind_all(names, values);
        Ok(())
    }

    fn finish_group(
        &mut self,
        idx: usize,
        values: Vec<Pattern>,
        out: &mut Vec<Action>,
    ) -> Result<(), ReactiveError> {
        let mut hosted = self.groups.remove(idx);
        hosted.group.teardown(&mut self.mux, out);
        match self.report_to.clone() {
            Some(id) => self.claim(state_result(id, values), out),
            None => self.bind_results(&hosted.results, values)?,
        }
        Ok(())
    }

    /// Runs script steps until the script blocks or ends. An actor with
    /// nothing left to run and nothing hosted quits.
    fn run_script(&mut self, out: &mut Vec<Action>) -> Result<(), ReactiveError> {
        while self.waiting.is_none() && self.groups.is_empty() {
            let Some(step) = self.steps.pop_front() else {
                break;
            };
            match step {
                ScriptStep::Send(expr) => out.push(Action::Message(expr(&self.scope)?)),
                ScriptStep::Run(effect) => {
                    let mut cx = Cx::new(std::mem::take(&mut self.scope), out);
                    let result = effect(&mut cx);
                    self.scope = cx.into_scope();
                    result?;
                }
                ScriptStep::State { results, build } => {
                    let spec = build(&self.scope)?;
                    let id = Pattern::string(format!("{}#{}", self.me, self.next_state));
                    self.next_state += 1;
                    // Subscribe before spawning: the child may finish during its own boot.
                    self.claim(result_interest(id.clone()), out);
                    let child = ReactiveActor::hosting(
                        spec,
                        self.scope.clone(),
                        Vec::new(),
                        Script::new(),
                        Some(id.clone()),
                    );
                    out.push(Action::Spawn(child.into_spawn()));
                    self.waiting = Some(Waiting { id, results });
                }
                ScriptStep::Host { results, spec } => {
                    let mut group = StateGroup::new(spec, self.scope.clone())?;
                    let outcome = group.install(&mut self.mux, out)?;
                    self.groups.push(Hosted { group, results });
                    if let Some(values) = outcome.terminated {
                        self.finish_group(self.groups.len() - 1, values, out)?;
                    }
                }
            }
        }
        if !self.finished
            && self.steps.is_empty()
            && self.waiting.is_none()
            && self.groups.is_empty()
        {
            self.finished = true;
            out.push(Action::Quit);
        }
        Ok(())
    }

    fn react(&mut self, event: &Event, out: &mut Vec<Action>) -> Result<bool, ReactiveError> {
        let mut proceed = false;
        if let (Some(w), Event::Patch(p)) = (&self.waiting, event) {
            let found = p
                .added()
                .iter()
                .find_map(|a| parse_state_result(a, &w.id))
                .map(<[Pattern]>::to_vec);
            if let Some(values) = found {
                let w = self.waiting.take().expect("waiting");
                self.release(&result_interest(w.id), out);
                self.bind_results(&w.results, values)?;
                proceed = true;
            }
        }

        let mut reacted = false;
        let mut i = 0;
        while i < self.groups.len() {
            let outcome = self.groups[i]
                .group
                .handle_event(event, &mut self.mux, out)?;
            reacted |= outcome.reacted;
            match outcome.terminated {
                Some(values) => {
                    self.finish_group(i, values, out)?;
                    proceed = true;
                }
                None => i += 1,
            }
        }

        if proceed {
            self.run_script(out)?;
        }
        Ok(reacted || proceed)
    }

    /// Assertions this actor currently publishes.
    pub fn asserted(&self) -> AssertionSet {
        self.mux.asserted()
    }
}

impl Behaviour for ReactiveActor {
    fn boot(&mut self, me: &ActorId) -> Step {
        self.me = me.clone();
        let mut out = Vec::new();
        match self.run_script(&mut out) {
            Ok(()) if out.is_empty() => Step::Unchanged,
            Ok(()) => Step::Continue(out),
            Err(e) => Step::Failure(e.to_string()),
        }
    }

    fn step(&mut self, event: &Event) -> Step {
        if self.finished {
            return Step::Unchanged;
        }
        let mut out = Vec::new();
        match self.react(event, &mut out) {
            Ok(false) if out.is_empty() => Step::Unchanged,
            Ok(_) => Step::Continue(out),
            Err(e) => Step::Failure(e.to_string()),
        }
    }
}

/// Spawns a reactive actor running `script` directly in `network`.
pub fn reactive_actor(network: &mut Network, script: Script) -> ActorId {
    network.spawn(script.into_spawn())
}
