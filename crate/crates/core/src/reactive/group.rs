//! Running instances of `state` forms.

use super::mux::Mux;
use super::scope::{Cx, Scope};
use super::spec::{Body, ClauseBody, EventSpec, Facet, Predicate, StateSpec, Template};
use super::{ReactiveError, STATE_RESULT_LABEL};
use crate::network::{Action, Event};
use crate::patch::AssertionSet;
use crate::projection::{compile_surface, CaptureTuple, CompiledPattern};
use crate::value::{matches, overlaps, Pattern};

enum Trigger {
    Message(CompiledPattern),
    Asserted(CompiledPattern),
    Retracted(CompiledPattern),
    RisingEdge { pred: Predicate, baseline: bool },
}

impl Trigger {
    fn compile(spec: EventSpec) -> Result<Self, ReactiveError> {
        if let Some(sp) = spec.surface() {
            if sp.mentions_label(STATE_RESULT_LABEL) {
                return Err(ReactiveError::ReservedLabel(STATE_RESULT_LABEL.into()));
            }
        }
        Ok(match spec {
            EventSpec::Message(sp) => Trigger::Message(compile_surface(&sp)?),
            EventSpec::Asserted(sp) => Trigger::Asserted(compile_surface(&sp)?),
            EventSpec::Retracted(sp) => Trigger::Retracted(compile_surface(&sp)?),
            EventSpec::RisingEdge(pred) => Trigger::RisingEdge {
                pred,
                baseline: false,
            },
        })
    }

    fn subscription(&self) -> Option<Pattern> {
        match self {
            Trigger::Message(c) | Trigger::Asserted(c) | Trigger::Retracted(c) => {
                Some(Pattern::observe(c.subscription.clone()))
            }
            Trigger::RisingEdge { .. } => None,
        }
    }

    /// Binder tuples for every occurrence of this trigger in `event`, in
    /// canonical assertion order. Rising edges are handled separately.
    fn occurrences(
        &self,
        event: Option<&Event>,
    ) -> Result<Vec<(Vec<String>, CaptureTuple)>, ReactiveError> {
        let (compiled, candidates): (&CompiledPattern, Vec<&Pattern>) = match (self, event) {
            (Trigger::Message(c), Some(Event::Message(m))) => (
                c,
                if matches(&c.subscription, m) {
                    vec![m]
                } else {
                    vec![]
                },
            ),
            (Trigger::Asserted(c), Some(Event::Patch(p))) => (
                c,
                p.added()
                    .iter()
                    .filter(|a| overlaps(&c.subscription, a))
                    .collect(),
            ),
            (Trigger::Retracted(c), Some(Event::Patch(p))) => (
                c,
                p.removed()
                    .iter()
                    .filter(|a| overlaps(&c.subscription, a))
                    .collect(),
            ),
            _ => return Ok(Vec::new()),
        };
        let mut out = Vec::with_capacity(candidates.len());
        for a in candidates {
            if let Some(tuple) = compiled.extraction.project(a)? {
                out.push((compiled.names.clone(), tuple));
            }
        }
        Ok(out)
    }

    /// Evaluates a rising-edge predicate and updates its baseline.
    fn edge(&mut self, scope: &Scope) -> Result<bool, ReactiveError> {
        match self {
            Trigger::RisingEdge { pred, baseline } => {
                let now = pred(scope)?;
                let fired = now && !*baseline;
                *baseline = now;
                Ok(fired)
            }
            _ => Ok(false),
        }
    }
}

enum InstalledFacet {
    Assert(Template),
    On(Trigger, Body),
}

struct InstalledClause {
    trigger: Trigger,
    body: ClauseBody,
}

/// What happened when a group saw an event.
#[derive(Debug, Default)]
pub struct GroupOutcome {
    /// Some facet or clause reacted, or the group's assertions changed.
    pub reacted: bool,
    /// Result values, if a termination clause fired.
    pub terminated: Option<Vec<Pattern>>,
}

/// An active `state`: its collected values, facets, termination clauses and
/// current contribution to the actor's assertions.
pub struct StateGroup {
    lexical: Scope,
    names: Vec<String>,
    collected: Vec<Pattern>,
    facets: Vec<InstalledFacet>,
    clauses: Vec<InstalledClause>,
    contribution: AssertionSet,
}

impl StateGroup {
    /// Compiles `spec` against the bindings in force where the state is
    /// entered.
    pub fn new(spec: StateSpec, lexical: Scope) -> Result<Self, ReactiveError> {
        let mut names = Vec::with_capacity(spec.collect.len());
        let mut collected = Vec::with_capacity(spec.collect.len());
        for (name, init) in spec.collect {
            if names.contains(&name) {
                return Err(ReactiveError::DuplicateCollect(name));
            }
            names.push(name);
            collected.push(init);
        }
        let facets = spec
            .facets
            .into_iter()
            .map(|f| {
                Ok(match f {
                    Facet::Assert(t) => InstalledFacet::Assert(t),
                    Facet::On(spec, body) => InstalledFacet::On(Trigger::compile(spec)?, body),
                })
            })
            .collect::<Result<_, ReactiveError>>()?;
        let clauses = spec
            .clauses
            .into_iter()
            .map(|c| {
                Ok(InstalledClause {
                    trigger: Trigger::compile(c.spec)?,
                    body: c.body,
                })
            })
            .collect::<Result<_, ReactiveError>>()?;
        Ok(StateGroup {
            lexical,
            names,
            collected,
            facets,
            clauses,
            contribution: AssertionSet::new(),
        })
    }

    pub fn collected(&self) -> &[Pattern] {
        &self.collected
    }

    /// Assertions this group currently claims through the mux.
    pub fn contribution(&self) -> &AssertionSet {
        &self.contribution
    }

    fn scope(&self) -> Scope {
        let mut s = self.lexical.clone();
        s.bind_all(&self.names, self.collected.iter().cloned());
        s
    }

    fn desired_contribution(&self) -> Result<AssertionSet, ReactiveError> {
        let scope = self.scope();
        let mut out = AssertionSet::new();
        for f in &self.facets {
            match f {
                InstalledFacet::Assert(template) => {
                    let a = template(&scope)?;
                    if a.mentions_label(STATE_RESULT_LABEL) {
                        return Err(ReactiveError::ReservedLabel(STATE_RESULT_LABEL.into()));
                    }
                    out.insert(a);
                }
                InstalledFacet::On(t, _) => out.extend(t.subscription()),
            }
        }
        out.extend(self.clauses.iter().filter_map(|c| c.trigger.subscription()));
        Ok(out)
    }

    fn refresh(&mut self, mux: &mut Mux, out: &mut Vec<Action>) -> Result<bool, ReactiveError> {
        let desired = self.desired_contribution()?;
        if desired == self.contribution {
            return Ok(false);
        }
        let patch = mux.update(&self.contribution, &desired);
        self.contribution = desired;
        if !patch.is_empty() {
            out.push(Action::Patch(patch));
        }
        Ok(true)
    }

    /// Publishes the group's subscriptions and assertions, then treats
    /// installation like an event with no payload: any rising-edge
    /// predicate that already holds fires now.
    pub fn install(
        &mut self,
        mux: &mut Mux,
        out: &mut Vec<Action>,
    ) -> Result<GroupOutcome, ReactiveError> {
        self.refresh(mux, out)?;
        self.process(None, mux, out)
    }

    /// Delivers one event: `on` bodies fold the collected values in facet
    /// order, assert facets are refreshed, then termination clauses are
    /// checked in declaration order.
    pub fn handle_event(
        &mut self,
        event: &Event,
        mux: &mut Mux,
        out: &mut Vec<Action>,
    ) -> Result<GroupOutcome, ReactiveError> {
        self.process(Some(event), mux, out)
    }

    fn process(
        &mut self,
        event: Option<&Event>,
        mux: &mut Mux,
        out: &mut Vec<Action>,
    ) -> Result<GroupOutcome, ReactiveError> {
        let mut reacted = false;
        for i in 0..self.facets.len() {
            let now = self.scope();
            let runs = match &mut self.facets[i] {
                InstalledFacet::Assert(_) => continue,
                InstalledFacet::On(trigger @ Trigger::RisingEdge { .. }, _) => {
                    if trigger.edge(&now)? {
                        vec![(Vec::new(), Vec::new())]
                    } else {
                        Vec::new()
                    }
                }
                InstalledFacet::On(trigger, _) => trigger.occurrences(event)?,
            };
            for (names, captures) in runs {
                let mut scope = self.scope();
                scope.bind_all(&names, captures);
                let InstalledFacet::On(_, body) = &mut self.facets[i] else {
                    unreachable!()
                };
                let mut cx = Cx::new(scope, out);
                let next = body(&mut cx)?;
                if next.len() != self.names.len() {
                    return Err(ReactiveError::FoldArity {
                        expected: self.names.len(),
                        found: next.len(),
                    });
                }
                self.collected = next;
                reacted = true;
            }
        }

        reacted |= self.refresh(mux, out)?;

        let scope = self.scope();
        for clause in &mut self.clauses {
            let fired = if matches!(clause.trigger, Trigger::RisingEdge { .. }) {
                clause
                    .trigger
                    .edge(&scope)?
                    .then(|| (Vec::new(), Vec::new()))
            } else {
                clause.trigger.occurrences(event)?.into_iter().next()
            };
            let Some((names, captures)) = fired else {
                continue;
            };
            let values = match &mut clause.body {
                ClauseBody::Collected => self.collected.clone(),
                ClauseBody::Custom(body) => {
                    let mut s = scope.clone();
                    s.bind_all(&names, captures);
                    body(&mut Cx::new(s, out))?
                }
            };
            return Ok(GroupOutcome {
                reacted: true,
                terminated: Some(values),
            });
        }
        Ok(GroupOutcome {
            reacted,
            terminated: None,
        })
    }

    /// Withdraws everything the group contributed.
    pub fn teardown(&mut self, mux: &mut Mux, out: &mut Vec<Action>) {
        let patch = mux.remove(&self.contribution);
        self.contribution.clear();
        if !patch.is_empty() {
            out.push(Action::Patch(patch));
        }
    }
}
