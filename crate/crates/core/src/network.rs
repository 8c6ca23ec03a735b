//! The network actor: a table of contained actors, the dataspace they
//! share, and a deterministic event queue.
//!
//! Actors never touch each other directly. A behaviour reacts to one
//! [`Event`] at a time and answers with [`Action`]s, which the network
//! interprets synchronously and in emission order before dispatching the
//! next queued event. Assertions live only as long as the asserting actor:
//! termination, clean or not, retracts everything the actor still asserts
//! and notifies whoever could see it.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bag::{Bag, Transition as BagTransition};
use crate::error::NetworkError;
use crate::patch::{interests_of, visible, AssertionSet, Patch};
use crate::trace::{TraceEntry, TraceEvent};
use crate::value::{overlaps, Pattern};

/// Position of an actor in the containment hierarchy. The empty path is the
/// ground network itself; it is rendered as `g`, and its children as `g/0`,
/// `g/1`, and so on.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActorId(Vec<u32>);

impl ActorId {
    pub fn ground() -> Self {
        ActorId(Vec::new())
    }

    pub fn child(&self, index: u32) -> Self {
        let mut path = self.0.clone();
        path.push(index);
        ActorId(path)
    }

    pub fn path(&self) -> &[u32] {
        &self.0
    }

    /// The containing network, or `None` for the ground network.
    pub fn parent(&self) -> Option<ActorId> {
        let (_, init) = self.0.split_last()?;
        Some(ActorId(init.to_vec()))
    }

    pub fn is_within(&self, network: &ActorId) -> bool {
        self.0.starts_with(&network.0)
    }
}

impl fmt::Display for ActorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("g")?;
        for i in &self.0 {
            write!(f, "/{i}")?;
        }
        Ok(())
    }
}

impl FromStr for ActorId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split('/');
        if parts.next() != Some("g") {
            return Err(format!("actor path `{s}` must start with `g`"));
        }
        parts
            .map(|p| {
                p.parse::<u32>()
                    .map_err(|e| format!("actor path `{s}`: {e}"))
            })
            .collect::<Result<_, _>>()
            .map(ActorId)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Patch(Patch),
    Message(Pattern),
}

pub enum Action {
    Patch(Patch),
    Message(Pattern),
    Spawn(Spawn),
    Quit,
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Patch(p) => f.debug_tuple("Patch").field(p).finish(),
            Action::Message(m) => f.debug_tuple("Message").field(m).finish(),
            Action::Spawn(s) => f.debug_tuple("Spawn").field(s).finish(),
            Action::Quit => f.write_str("Quit"),
        }
    }
}

/// What to create: a leaf actor with its startup actions, or a nested
/// network with its initial children.
pub struct Spawn {
    kind: SpawnKind,
    startup: Vec<Action>,
}

enum SpawnKind {
    Leaf(Box<dyn Behaviour>),
    Network(Vec<Spawn>),
}

impl Spawn {
    pub fn leaf(behaviour: Box<dyn Behaviour>, startup: Vec<Action>) -> Self {
        Spawn {
            kind: SpawnKind::Leaf(behaviour),
            startup,
        }
    }

    /// A nested network whose children share only its private dataspace.
    pub fn network(children: Vec<Spawn>) -> Self {
        Spawn {
            kind: SpawnKind::Network(children),
            startup: Vec::new(),
        }
    }
}

impl fmt::Debug for Spawn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SpawnKind::Leaf(_) => f
                .debug_struct("Spawn::leaf")
                .field("startup", &self.startup)
                .finish(),
            SpawnKind::Network(children) => f
                .debug_struct("Spawn::network")
                .field("children", children)
                .finish(),
        }
    }
}

/// Result of running a behaviour on one event.
#[derive(Debug)]
pub enum Step {
    Continue(Vec<Action>),
    Unchanged,
    Failure(String),
}

/// A leaf actor's behaviour. `step` must be deterministic.
pub trait Behaviour {
    /// Called once, right after the actor's startup actions have been
    /// interpreted, with the actor's own id.
    fn boot(&mut self, _me: &ActorId) -> Step {
        Step::Unchanged
    }

    fn step(&mut self, event: &Event) -> Step;
}

/// Result of a state-passing behaviour function.
pub enum Transition<S> {
    Continue(S, Vec<Action>),
    Unchanged,
    Failure(String),
}

struct Leaf<S, F> {
    state: S,
    handler: F,
}

impl<S, F> Behaviour for Leaf<S, F>
where
    F: FnMut(&Event, &S) -> Transition<S>,
{
    fn step(&mut self, event: &Event) -> Step {
        match (self.handler)(event, &self.state) {
            Transition::Continue(next, actions) => {
                self.state = next;
                Step::Continue(actions)
            }
            Transition::Unchanged => Step::Unchanged,
            Transition::Failure(reason) => Step::Failure(reason),
        }
    }
}

/// Wraps a behaviour function and an initial private state.
pub fn leaf<S, F>(initial: S, handler: F) -> Box<dyn Behaviour>
where
    S: 'static,
    F: FnMut(&Event, &S) -> Transition<S> + 'static,
{
    Box::new(Leaf {
        state: initial,
        handler,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Termination {
    Clean,
    Crash(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dispatch {
    Dispatched,
    Quiescent,
}

enum ActorKind {
    Leaf(Box<dyn Behaviour>),
    Network(Box<Network>),
}

struct Slot {
    id: ActorId,
    kind: ActorKind,
    asserted: AssertionSet,
    interests: AssertionSet,
    last_visible: AssertionSet,
}

enum Delivery {
    Event(Event),
    /// Run one dispatch step inside a nested network.
    Tick,
}

enum Schedule {
    Fifo,
    Shuffled(Box<ChaCha8Rng>),
}

pub struct Network {
    prefix: ActorId,
    actors: BTreeMap<u32, Slot>,
    aggregate: Bag<Pattern>,
    queue: VecDeque<(u32, Delivery)>,
    trace: Vec<TraceEntry>,
    next_index: u32,
    next_seq: u64,
    oracle: bool,
    schedule: Schedule,
}

impl Default for Network {
    fn default() -> Self {
        Self::new()
    }
}

impl Network {
    /// The ground network.
    pub fn new() -> Self {
        Self::with_prefix(ActorId::ground())
    }

    fn with_prefix(prefix: ActorId) -> Self {
        Network {
            prefix,
            actors: BTreeMap::new(),
            aggregate: Bag::new(),
            queue: VecDeque::new(),
            trace: Vec::new(),
            next_index: 0,
            next_seq: 0,
            oracle: false,
            schedule: Schedule::Fifo,
        }
    }

    /// After every dispatch, recompute the aggregate and every actor's
    /// visible set from scratch and fail on any disagreement with the
    /// incremental bookkeeping.
    pub fn enable_oracle(&mut self) {
        self.oracle = true;
    }

    /// Replace FIFO scheduling with a seeded random interleaving that still
    /// delivers each actor's own events in order.
    pub fn shuffle_schedule(&mut self, seed: u64) {
        self.schedule = Schedule::Shuffled(Box::new(ChaCha8Rng::seed_from_u64(seed)));
    }

    pub fn id(&self) -> &ActorId {
        &self.prefix
    }

    pub fn actor_count(&self) -> usize {
        self.actors.len()
    }

    pub fn actor_ids(&self) -> impl Iterator<Item = &ActorId> {
        self.actors.values().map(|s| &s.id)
    }

    pub fn contains(&self, id: &ActorId) -> bool {
        self.slot(id).is_some()
    }

    pub fn aggregate(&self) -> &Bag<Pattern> {
        &self.aggregate
    }

    pub fn aggregate_set(&self) -> AssertionSet {
        self.aggregate.support().cloned().collect()
    }

    pub fn asserted(&self, id: &ActorId) -> Option<&AssertionSet> {
        self.slot(id).map(|s| &s.asserted)
    }

    pub fn last_visible(&self, id: &ActorId) -> Option<&AssertionSet> {
        self.slot(id).map(|s| &s.last_visible)
    }

    pub fn nested(&self, id: &ActorId) -> Option<&Network> {
        match &self.slot(id)?.kind {
            ActorKind::Network(n) => Some(n),
            ActorKind::Leaf(_) => None,
        }
    }

    /// Queued events addressed to leaf actors, oldest first.
    pub fn pending_events(&self) -> impl Iterator<Item = (&ActorId, &Event)> {
        self.queue.iter().filter_map(|(idx, d)| match d {
            Delivery::Event(e) => Some((&self.actors[idx].id, e)),
            Delivery::Tick => None,
        })
    }

    pub fn is_quiescent(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn trace(&self) -> &[TraceEntry] {
        &self.trace
    }

    pub fn take_trace(&mut self) -> Vec<TraceEntry> {
        std::mem::take(&mut self.trace)
    }

    fn local_index(&self, id: &ActorId) -> Option<u32> {
        match id.path().split_last() {
            Some((last, init)) if init == self.prefix.path() => Some(*last),
            _ => None,
        }
    }

    fn slot(&self, id: &ActorId) -> Option<&Slot> {
        self.actors.get(&self.local_index(id)?)
    }

    fn record(&mut self, actor: ActorId, event: TraceEvent) {
        self.trace.push(TraceEntry {
            seq: self.next_seq,
            actor,
            event,
        });
        self.next_seq += 1;
    }

    fn record_at(&mut self, idx: u32, event: TraceEvent) {
        let id = self.actors[&idx].id.clone();
        self.record(id, event);
    }

    pub fn spawn_leaf(&mut self, behaviour: Box<dyn Behaviour>, startup: Vec<Action>) -> ActorId {
        self.spawn(Spawn::leaf(behaviour, startup))
    }

    pub fn spawn_nested_network(&mut self, children: Vec<Spawn>) -> ActorId {
        self.spawn(Spawn::network(children))
    }

    /// Registers a new actor with an empty assertion set and interprets its
    /// startup actions, then boots it.
    pub fn spawn(&mut self, spawn: Spawn) -> ActorId {
        let idx = self.next_index;
        self.next_index += 1;
        let id = self.prefix.child(idx);
        let Spawn { kind, startup } = spawn;
        match kind {
            SpawnKind::Leaf(behaviour) => {
                self.insert_slot(idx, id.clone(), ActorKind::Leaf(behaviour));
                self.record(id.clone(), TraceEvent::Spawn { network: false });
                self.interpret_all(idx, startup);
                let booted = match self.actors.get_mut(&idx).map(|s| &mut s.kind) {
                    Some(ActorKind::Leaf(b)) => Some(b.boot(&id)),
                    _ => None,
                };
                if let Some(step) = booted {
                    self.handle_step(idx, step);
                }
            }
            SpawnKind::Network(children) => {
                let mut inner = Network::with_prefix(id.clone());
                inner.oracle = self.oracle;
                if let Schedule::Shuffled(rng) = &mut self.schedule {
                    inner.schedule =
                        Schedule::Shuffled(Box::new(ChaCha8Rng::seed_from_u64(rng.gen())));
                }
                self.record(id.clone(), TraceEvent::Spawn { network: true });
                for child in children {
                    inner.spawn(child);
                }
                let busy = !inner.is_quiescent();
                let entries = inner.take_trace();
                self.insert_slot(idx, id.clone(), ActorKind::Network(Box::new(inner)));
                self.absorb(entries);
                if busy {
                    self.queue.push_back((idx, Delivery::Tick));
                }
            }
        }
        id
    }

    fn insert_slot(&mut self, idx: u32, id: ActorId, kind: ActorKind) {
        self.actors.insert(
            idx,
            Slot {
                id,
                kind,
                asserted: AssertionSet::new(),
                interests: AssertionSet::new(),
                last_visible: AssertionSet::new(),
            },
        );
    }

    fn absorb(&mut self, entries: Vec<TraceEntry>) {
        for e in entries {
            self.record(e.actor, e.event);
        }
    }

    /// Interprets `action` on behalf of actor `id`. Ignored if the actor
    /// is not (or no longer) registered here.
    pub fn interpret_action(&mut self, id: &ActorId, action: Action) {
        if let Some(idx) = self.local_index(id) {
            self.interpret(idx, action);
        }
    }

    /// Terminates actor `id`, retracting all of its assertions.
    pub fn terminate_actor(&mut self, id: &ActorId, reason: Termination) {
        if let Some(idx) = self.local_index(id) {
            self.terminate(idx, reason);
        }
    }

    fn interpret_all(&mut self, idx: u32, actions: Vec<Action>) {
        for action in actions {
            if !self.actors.contains_key(&idx) {
                break;
            }
            self.interpret(idx, action);
        }
    }

    fn interpret(&mut self, idx: u32, action: Action) {
        if !self.actors.contains_key(&idx) {
            return;
        }
        match action {
            Action::Patch(p) => self.apply_actor_patch(idx, &p),
            Action::Message(body) => {
                if body.is_ground() {
                    self.record_at(idx, TraceEvent::Message(body.clone()));
                    self.route_message(body);
                } else {
                    self.terminate(idx, Termination::Crash(format!("NonGroundMessage: {body}")));
                }
            }
            Action::Spawn(s) => {
                self.spawn(s);
            }
            Action::Quit => self.terminate(idx, Termination::Clean),
        }
    }

    fn route_message(&mut self, body: Pattern) {
        let targets: Vec<u32> = self
            .actors
            .iter()
            .filter(|(_, s)| s.interests.iter().any(|p| overlaps(p, &body)))
            .map(|(idx, _)| *idx)
            .collect();
        for idx in targets {
            self.queue
                .push_back((idx, Delivery::Event(Event::Message(body.clone()))));
        }
    }

    fn apply_actor_patch(&mut self, idx: u32, patch: &Patch) {
        let slot = self.actors.get_mut(&idx).expect("live actor");
        let clamped = patch.clamp(&slot.asserted);
        if clamped.is_empty() {
            return;
        }
        let id = slot.id.clone();
        let interests_changed = clamped
            .added()
            .iter()
            .chain(clamped.removed())
            .any(|a| a.observed().is_some());
        clamped.apply_in_place(&mut slot.asserted);
        if interests_changed {
            slot.interests = interests_of(&slot.asserted);
        }

        let mut appeared = Vec::new();
        let mut vanished = Vec::new();
        for a in clamped.added() {
            if self.aggregate.insert(a) == BagTransition::AbsentToPresent {
                appeared.push(a.clone());
            }
        }
        for r in clamped.removed() {
            if self.aggregate.remove(r) == BagTransition::PresentToAbsent {
                vanished.push(r.clone());
            }
        }
        self.record(id, TraceEvent::PatchOut(clamped));

        if appeared.is_empty() && vanished.is_empty() && !interests_changed {
            return;
        }

        let mut notifications = Vec::new();
        for (b, slot) in self.actors.iter_mut() {
            let update = if *b == idx && interests_changed {
                let now = visible(self.aggregate.support(), &slot.interests);
                crate::patch::delta(&slot.last_visible, &now)
            } else {
                let added: AssertionSet = appeared
                    .iter()
                    .filter(|a| slot.interests.iter().any(|p| overlaps(p, a)))
                    .cloned()
                    .collect();
                let removed: AssertionSet = vanished
                    .iter()
                    .filter(|r| slot.last_visible.contains(*r))
                    .cloned()
                    .collect();
                Patch::new(added, removed).expect("appeared and vanished are disjoint")
            };
            if !update.is_empty() {
                update.apply_in_place(&mut slot.last_visible);
                notifications.push((*b, update));
            }
        }
        for (b, update) in notifications {
            self.queue
                .push_back((b, Delivery::Event(Event::Patch(update))));
        }
    }

    fn terminate(&mut self, idx: u32, reason: Termination) {
        let Some(slot) = self.actors.get_mut(&idx) else {
            return;
        };
        if let ActorKind::Network(inner) = &mut slot.kind {
            let children: Vec<u32> = inner.actors.keys().copied().collect();
            for child in children {
                inner.terminate(child, Termination::Clean);
            }
            let entries = inner.take_trace();
            self.absorb(entries);
        }
        let slot = &self.actors[&idx];
        if !slot.asserted.is_empty() {
            let everything = Patch::retract(slot.asserted.iter().cloned());
            self.apply_actor_patch(idx, &everything);
        }
        let event = match reason {
            Termination::Clean => TraceEvent::Quit,
            Termination::Crash(detail) => TraceEvent::Crash(detail),
        };
        self.record_at(idx, event);
        self.actors.remove(&idx);
        self.queue.retain(|(i, _)| *i != idx);
    }

    fn handle_step(&mut self, idx: u32, step: Step) {
        match step {
            Step::Continue(actions) => self.interpret_all(idx, actions),
            Step::Unchanged => {}
            Step::Failure(reason) => self.terminate(idx, Termination::Crash(reason)),
        }
    }

    fn pop_next(&mut self) -> Option<(u32, Delivery)> {
        match &mut self.schedule {
            Schedule::Fifo => self.queue.pop_front(),
            Schedule::Shuffled(rng) => {
                if self.queue.is_empty() {
                    return None;
                }
                let pick = rng.gen_range(0..self.queue.len());
                let target = self.queue[pick].0;
                let first = self
                    .queue
                    .iter()
                    .position(|(i, _)| *i == target)
                    .expect("picked actor has a queued event");
                self.queue.remove(first)
            }
        }
    }

    /// Delivers the next queued event. Behaviour failures are absorbed as
    /// crashes; the only errors are oracle divergences.
    pub fn dispatch_one(&mut self) -> Result<Dispatch, NetworkError> {
        let Some((idx, delivery)) = self.pop_next() else {
            return Ok(Dispatch::Quiescent);
        };
        match delivery {
            Delivery::Event(event) => {
                let traced = match &event {
                    Event::Patch(p) => TraceEvent::PatchIn(p.clone()),
                    Event::Message(m) => TraceEvent::EventMessage(m.clone()),
                };
                self.record_at(idx, traced);
                let step = match &mut self
                    .actors
                    .get_mut(&idx)
                    .expect("queued actor is live")
                    .kind
                {
                    ActorKind::Leaf(b) => b.step(&event),
                    ActorKind::Network(_) => Step::Unchanged,
                };
                self.handle_step(idx, step);
            }
            Delivery::Tick => {
                let Some(ActorKind::Network(inner)) =
                    self.actors.get_mut(&idx).map(|s| &mut s.kind)
                else {
                    unreachable!("ticks are only queued for nested networks");
                };
                let result = inner.dispatch_one();
                let busy = !inner.is_quiescent();
                let entries = inner.take_trace();
                self.absorb(entries);
                result?;
                if busy {
                    self.queue.push_back((idx, Delivery::Tick));
                }
            }
        }
        if self.oracle {
            self.check_consistency()?;
        }
        Ok(Dispatch::Dispatched)
    }

    /// Dispatches until the queue is empty. Returns the number of dispatches.
    pub fn run_until_quiescent(&mut self, max_steps: usize) -> Result<usize, NetworkError> {
        let mut steps = 0;
        loop {
            if steps == max_steps {
                return if self.is_quiescent() {
                    Ok(steps)
                } else {
                    Err(NetworkError::NonQuiescent(max_steps))
                };
            }
            match self.dispatch_one()? {
                Dispatch::Quiescent => return Ok(steps),
                Dispatch::Dispatched => steps += 1,
            }
        }
    }

    /// Recomputes the aggregate and all visible sets from the per-actor
    /// assertion sets and compares them with the incremental state.
    pub fn check_consistency(&self) -> Result<(), NetworkError> {
        let mut counts: BTreeMap<&Pattern, usize> = BTreeMap::new();
        for slot in self.actors.values() {
            for a in &slot.asserted {
                *counts.entry(a).or_default() += 1;
            }
        }
        let incremental: BTreeMap<&Pattern, usize> = self.aggregate.iter().collect();
        if counts != incremental {
            return Err(NetworkError::OracleDivergence {
                actor: self.prefix.clone(),
                detail: "aggregate counts differ from per-actor assertion sets".into(),
            });
        }
        for slot in self.actors.values() {
            let interests = interests_of(&slot.asserted);
            let expected = visible(counts.keys().copied(), &interests);
            if interests != slot.interests || expected != slot.last_visible {
                return Err(NetworkError::OracleDivergence {
                    actor: slot.id.clone(),
                    detail: format!(
                        "expected visible {:?}, bookkept {:?}",
                        expected, slot.last_visible
                    ),
                });
            }
        }
        Ok(())
    }
}
