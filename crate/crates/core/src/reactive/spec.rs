//! Declarative description of a `state`: collected values, facets and
//! termination clauses.

use super::scope::{Cx, Scope};
use super::ReactiveError;
use crate::projection::SurfacePattern;
use crate::value::Pattern;

pub(crate) type Template = Box<dyn Fn(&Scope) -> Result<Pattern, ReactiveError>>;
pub(crate) type Body = Box<dyn FnMut(&mut Cx) -> Result<Vec<Pattern>, ReactiveError>>;
pub(crate) type Predicate = Box<dyn Fn(&Scope) -> Result<bool, ReactiveError>>;

/// The four kinds of event a facet or termination clause can wait for.
pub enum EventSpec {
    /// A message matching the pattern arrives.
    Message(SurfacePattern),
    /// Fires once per matching assertion added to the visible dataspace.
    Asserted(SurfacePattern),
    /// Fires once per matching assertion removed from it.
    Retracted(SurfacePattern),
    /// Fires when the predicate over the state's bindings turns from false
    /// to true after an event.
    RisingEdge(Predicate),
}

impl EventSpec {
    pub fn message(p: impl Into<SurfacePattern>) -> Self {
        EventSpec::Message(p.into())
    }

    pub fn asserted(p: impl Into<SurfacePattern>) -> Self {
        EventSpec::Asserted(p.into())
    }

    pub fn retracted(p: impl Into<SurfacePattern>) -> Self {
        EventSpec::Retracted(p.into())
    }

    pub fn rising_edge(pred: impl Fn(&Scope) -> Result<bool, ReactiveError> + 'static) -> Self {
        EventSpec::RisingEdge(Box::new(pred))
    }

    pub(crate) fn surface(&self) -> Option<&SurfacePattern> {
        match self {
            EventSpec::Message(p) | EventSpec::Asserted(p) | EventSpec::Retracted(p) => Some(p),
            EventSpec::RisingEdge(_) => None,
        }
    }
}

pub(crate) enum Facet {
    Assert(Template),
    On(EventSpec, Body),
}

pub(crate) enum ClauseBody {
    Custom(Body),
    /// Return the collected values as the state's result.
    Collected,
}

pub(crate) struct Clause {
    pub(crate) spec: EventSpec,
    pub(crate) body: ClauseBody,
}

/// A `state` form. With no termination clauses it is `forever`; with one,
/// `until`.
#[derive(Default)]
pub struct StateSpec {
    pub(crate) collect: Vec<(String, Pattern)>,
    pub(crate) facets: Vec<Facet>,
    pub(crate) clauses: Vec<Clause>,
}

impl StateSpec {
    /// A state with no termination clauses (`forever` until more are added).
    pub fn new() -> Self {
        Self::default()
    }

    /// `until`: a state ending on the first occurrence of `spec` and
    /// returning its collected values.
    pub fn until(spec: EventSpec) -> Self {
        Self::new().stop_on(spec)
    }

    /// Adds a `#:collect` binding with its initial value.
    pub fn collect(mut self, name: impl Into<String>, initial: impl Into<Pattern>) -> Self {
        self.collect.push((name.into(), initial.into()));
        self
    }

    /// An `assert` facet, re-evaluated after every event.
    pub fn assert(
        mut self,
        template: impl Fn(&Scope) -> Result<Pattern, ReactiveError> + 'static,
    ) -> Self {
        self.facets.push(Facet::Assert(Box::new(template)));
        self
    }

    /// An `on` facet. The body returns the new collected values.
    pub fn on(
        mut self,
        spec: EventSpec,
        body: impl FnMut(&mut Cx) -> Result<Vec<Pattern>, ReactiveError> + 'static,
    ) -> Self {
        self.facets.push(Facet::On(spec, Box::new(body)));
        self
    }

    /// A termination clause whose body computes the state's result values.
    pub fn terminate_on(
        mut self,
        spec: EventSpec,
        body: impl FnMut(&mut Cx) -> Result<Vec<Pattern>, ReactiveError> + 'static,
    ) -> Self {
        self.clauses.push(Clause {
            spec,
            body: ClauseBody::Custom(Box::new(body)),
        });
        self
    }

    /// A termination clause returning the collected values unchanged.
    pub fn stop_on(mut self, spec: EventSpec) -> Self {
        self.clauses.push(Clause {
            spec,
            body: ClauseBody::Collected,
        });
        self
    }
}
