//! Replayable dataspace scenarios and the trace tooling around them.

use std::path::{Path, PathBuf};

use dataspace_core::trace::{self, aggregate_snapshots, TraceEntry};
use dataspace_core::{ActorId, Network, NetworkError, Pattern};
use thiserror::Error;

pub mod bank;
pub mod counter;
pub mod files;

/// A named, deterministic network setup.
pub struct Scenario {
    pub name: &'static str,
    pub summary: &'static str,
    pub build: fn(&mut Network),
    /// Dispatch budget for reaching quiescence.
    pub max_steps: usize,
}

impl Scenario {
    pub fn golden_file(&self) -> String {
        format!("{}.ndjson", self.name)
    }
}

static SCENARIOS: &[Scenario] = &[
    Scenario {
        name: "bank-account-plain",
        summary: "account manager, observer and updater as behaviour functions",
        build: bank::build_plain,
        max_steps: 100,
    },
    Scenario {
        name: "bank-account-reactive",
        summary: "the same bank account written with state facets",
        build: bank::build_reactive,
        max_steps: 100,
    },
    Scenario {
        name: "bank-account-nested",
        summary: "the plain bank account inside a nested network",
        build: bank::build_nested,
        max_steps: 100,
    },
    Scenario {
        name: "counter",
        summary: "counts five 'incr messages, then sends 'too-many and 'finished",
        build: counter::build,
        max_steps: 200,
    },
    Scenario {
        name: "counter-interrupt",
        summary: "the counter, interrupted after two increments",
        build: counter::build_interrupted,
        max_steps: 200,
    },
    Scenario {
        name: "file-system-plain",
        summary: "file store with one observation actor per watched name",
        build: files::build_plain,
        max_steps: 200,
    },
    Scenario {
        name: "file-system-reactive",
        summary: "the file store with a detached state per watched name",
        build: files::build_reactive,
        max_steps: 200,
    },
];

pub fn scenarios() -> &'static [Scenario] {
    SCENARIOS
}

pub fn find(name: &str) -> Option<&'static Scenario> {
    SCENARIOS.iter().find(|s| s.name == name)
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Recompute visibility from scratch after every dispatch.
    pub oracle: bool,
    /// Interleave deliveries pseudo-randomly from this seed.
    pub shuffle: Option<u64>,
    /// Overrides the scenario's budget.
    pub max_steps: Option<usize>,
}

/// Builds the scenario and runs it to quiescence, returning the network.
pub fn run_network(s: &Scenario, opts: &RunOptions) -> Result<Network, NetworkError> {
    let mut net = Network::new();
    if opts.oracle {
        net.enable_oracle();
    }
    if let Some(seed) = opts.shuffle {
        net.shuffle_schedule(seed);
    }
    (s.build)(&mut net);
    net.run_until_quiescent(opts.max_steps.unwrap_or(s.max_steps))?;
    Ok(net)
}

pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> Result<Vec<TraceEntry>, NetworkError> {
    run_network(s, opts).map(|mut net| net.take_trace())
}

/// Compares the distinct top-level dataspace snapshots of two traces,
/// restricted to instances of `lens`. Actor identities play no part.
pub fn traces_equivalent(a: &[TraceEntry], b: &[TraceEntry], lens: &Pattern) -> bool {
    let root = ActorId::ground();
    aggregate_snapshots(a, &root, lens) == aggregate_snapshots(b, &root, lens)
}

pub fn default_goldens_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("goldens")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: expected {expected:?}, found {found:?}")]
pub struct GoldenMismatch {
    /// 1-based.
    pub line: usize,
    pub expected: Option<String>,
    pub found: Option<String>,
}

/// First line where `actual` departs from `golden`.
pub fn compare_golden(golden: &str, actual: &str) -> Result<(), GoldenMismatch> {
    let mut g = golden.lines();
    let mut a = actual.lines();
    let mut line = 1;
    loop {
        match (g.next(), a.next()) {
            (None, None) => return Ok(()),
            (x, y) if x == y => line += 1,
            (x, y) => {
                return Err(GoldenMismatch {
                    line,
                    expected: x.map(str::to_string),
                    found: y.map(str::to_string),
                })
            }
        }
    }
}

pub fn render(entries: &[TraceEntry]) -> String {
    trace::render(entries)
}
