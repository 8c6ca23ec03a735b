//! Trace records emitted by a [`Network`](crate::network::Network).
//!
//! A trace file is newline-delimited JSON, one record per line:
//!
//! ```text
//! {"seq":0,"actor":"g/0","kind":"spawn","data":"'leaf"}
//! {"seq":1,"actor":"g/0","kind":"patch-out","data":{"added":[["account",0]],"removed":[]}}
//! ```
//!
//! `patch-out` is the (clamped) patch an actor applied to its own assertion
//! set, `patch-in` a patch event dispatched to it, `message` a message it
//! sent and `event-message` a message event dispatched to it. Retraction on
//! termination appears as a final `patch-out` before the `quit` or `crash`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use thiserror::Error;

use crate::codec::{pattern_from_json, pattern_to_json};
use crate::network::ActorId;
use crate::patch::{AssertionSet, Patch};
use crate::value::{subsumes, Pattern};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    Spawn { network: bool },
    Quit,
    Crash(String),
    Message(Pattern),
    PatchOut(Patch),
    PatchIn(Patch),
    EventMessage(Pattern),
}

impl TraceEvent {
    pub fn kind(&self) -> &'static str {
        match self {
            TraceEvent::Spawn { .. } => "spawn",
            TraceEvent::Quit => "quit",
            TraceEvent::Crash(_) => "crash",
            TraceEvent::Message(_) => "message",
            TraceEvent::PatchOut(_) => "patch-out",
            TraceEvent::PatchIn(_) => "patch-in",
            TraceEvent::EventMessage(_) => "event-message",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub seq: u64,
    pub actor: ActorId,
    pub event: TraceEvent,
}

#[derive(Serialize, Deserialize)]
struct Record {
    seq: u64,
    actor: String,
    kind: String,
    data: Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("trace line {line}: {detail}")]
pub struct TraceParseError {
    pub line: usize,
    pub detail: String,
}

impl TraceEntry {
    pub fn to_json_line(&self) -> String {
        let data = match &self.event {
            TraceEvent::Spawn { network } => {
                pattern_to_json(&Pattern::symbol(if *network { "network" } else { "leaf" }))
            }
            TraceEvent::Quit => Json::Null,
            TraceEvent::Crash(reason) => pattern_to_json(&Pattern::string(reason.clone())),
            TraceEvent::Message(m) | TraceEvent::EventMessage(m) => pattern_to_json(m),
            TraceEvent::PatchOut(p) | TraceEvent::PatchIn(p) => p.to_json(),
        };
        let record = Record {
            seq: self.seq,
            actor: self.actor.to_string(),
            kind: self.event.kind().to_string(),
            data,
        };
        serde_json::to_string(&record).expect("trace records always serialize")
    }

    pub fn from_json_line(line: &str) -> Result<Self, String> {
        let r: Record = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let actor: ActorId = r.actor.parse()?;
        let pattern = |j: &Json| pattern_from_json(j).map_err(|e| e.to_string());
        let event = match r.kind.as_str() {
            "spawn" => match pattern(&r.data)?.as_symbol() {
                Some("leaf") => TraceEvent::Spawn { network: false },
                Some("network") => TraceEvent::Spawn { network: true },
                _ => return Err("spawn data must be 'leaf or 'network".into()),
            },
            "quit" => TraceEvent::Quit,
            "crash" => TraceEvent::Crash(
                pattern(&r.data)?
                    .as_str()
                    .ok_or("crash data must be a string")?
                    .to_string(),
            ),
            "message" => TraceEvent::Message(pattern(&r.data)?),
            "event-message" => TraceEvent::EventMessage(pattern(&r.data)?),
            "patch-out" => {
                TraceEvent::PatchOut(Patch::from_json(&r.data).map_err(|e| e.to_string())?)
            }
            "patch-in" => {
                TraceEvent::PatchIn(Patch::from_json(&r.data).map_err(|e| e.to_string())?)
            }
            other => return Err(format!("unknown kind `{other}`")),
        };
        Ok(TraceEntry {
            seq: r.seq,
            actor,
            event,
        })
    }
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json_line())
    }
}

/// Renders entries as a trace file: one JSON record per line, LF-terminated.
pub fn render(entries: &[TraceEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(&e.to_json_line());
        out.push('\n');
    }
    out
}

/// Parses a trace file, checking that `seq` counts up from 0.
pub fn parse(text: &str) -> Result<Vec<TraceEntry>, TraceParseError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let entry = TraceEntry::from_json_line(line).map_err(|detail| TraceParseError {
            line: i + 1,
            detail,
        })?;
        if entry.seq != out.len() as u64 {
            return Err(TraceParseError {
                line: i + 1,
                detail: format!("expected seq {}, found {}", out.len(), entry.seq),
            });
        }
        out.push(entry);
    }
    Ok(out)
}

/// Replays `patch-out` entries of the actors directly contained in
/// `network` and returns the sequence of distinct dataspace contents,
/// restricted to assertions that are instances of `lens`. The sequence
/// starts with the empty snapshot.
pub fn aggregate_snapshots(
    entries: &[TraceEntry],
    network: &ActorId,
    lens: &Pattern,
) -> Vec<AssertionSet> {
    let mut per_actor: BTreeMap<&ActorId, AssertionSet> = BTreeMap::new();
    let mut counts: BTreeMap<Pattern, usize> = BTreeMap::new();
    let mut out = vec![AssertionSet::new()];
    for e in entries {
        let TraceEvent::PatchOut(p) = &e.event else {
            continue;
        };
        if e.actor.parent().as_ref() != Some(network) {
            continue;
        }
        let mine = per_actor.entry(&e.actor).or_default();
        for r in p.removed() {
            if mine.remove(r) {
                if let Some(n) = counts.get_mut(r) {
                    *n -= 1;
                    if *n == 0 {
                        counts.remove(r);
                    }
                }
            }
        }
        for a in p.added() {
            if mine.insert(a.clone()) {
                *counts.entry(a.clone()).or_default() += 1;
            }
        }
        let snapshot: AssertionSet = counts
            .keys()
            .filter(|a| subsumes(lens, a))
            .cloned()
            .collect();
        if out.last() != Some(&snapshot) {
            out.push(snapshot);
        }
    }
    out
}
