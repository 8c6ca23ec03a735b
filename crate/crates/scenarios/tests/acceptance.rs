//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so that the report is always printed.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::process::{Command, ExitCode};
use std::time::Instant;

use dataspace_core::reactive::{EventSpec, Mux, Scope, StateGroup, StateSpec};
use dataspace_core::trace::{aggregate_snapshots, TraceEntry, TraceEvent};
use dataspace_core::{
    delta, leaf, Action, ActorId, AssertionSet, Event, Network, Patch, Pattern as P, Termination,
    Transition,
};
use dataspace_scenarios::{
    compare_golden, default_goldens_dir, find, render, run_network, run_scenario, scenarios,
    traces_equivalent, RunOptions,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn trace_of(name: &str) -> Result<Vec<TraceEntry>, String> {
    let s = find(name).ok_or_else(|| format!("no scenario {name}"))?;
    run_scenario(s, &RunOptions::default()).map_err(|e| format!("{name}: {e}"))
}

fn messages(t: &[TraceEntry]) -> Vec<P> {
    t.iter()
        .filter_map(|e| match &e.event {
            TraceEvent::Message(m) => Some(m.clone()),
            _ => None,
        })
        .collect()
}

fn sym(s: &str) -> P {
    P::symbol(s)
}

// 1 -------------------------------------------------------------------------

fn bank_account() -> Outcome {
    let lens = P::record("account", [P::Wildcard]);
    let expected: Vec<AssertionSet> = [0, 100, 70]
        .iter()
        .map(|&n| [P::record("account", [P::int(n)])].into())
        .collect();
    let started = Instant::now();
    let mut runs = Vec::new();
    for name in ["bank-account-plain", "bank-account-reactive"] {
        let t = trace_of(name)?;
        let snaps = aggregate_snapshots(&t, &ActorId::ground(), &lens);
        ensure(snaps[0].is_empty() && snaps[1..] == expected[..], || {
            format!("{name}: account snapshots {snaps:?}")
        })?;
        // The observer sees the same progression.
        let observer_view: Vec<P> = t
            .iter()
            .filter_map(|e| match &e.event {
                TraceEvent::PatchIn(p) => Some(
                    p.added()
                        .iter()
                        .filter(|a| a.label() == Some("account"))
                        .cloned(),
                ),
                _ => None,
            })
            .flatten()
            .collect();
        ensure(
            observer_view == expected.iter().flatten().cloned().collect::<Vec<_>>(),
            || format!("{name}: observer saw {observer_view:?}"),
        )?;
        runs.push(t);
    }
    let elapsed = started.elapsed();
    ensure(elapsed.as_secs_f64() < 1.0, || format!("took {elapsed:?}"))?;
    ensure(traces_equivalent(&runs[0], &runs[1], &lens), || {
        "plain and reactive differ".into()
    })?;
    Ok(format!(
        "account(0) -> account(100) -> account(70) in both variants, {elapsed:?}"
    ))
}

// 2 -------------------------------------------------------------------------

fn progress_values(t: &[TraceEntry]) -> Vec<i64> {
    t.iter()
        .filter_map(|e| match &e.event {
            TraceEvent::PatchOut(p) => Some(p.added().iter().cloned().collect::<Vec<_>>()),
            _ => None,
        })
        .flatten()
        .filter(|a| {
            a.label() == Some("list") && a.fields().first() == Some(&sym("incrs-seen-so-far"))
        })
        .filter_map(|a| a.fields()[1].as_int())
        .collect()
}

fn counter() -> Outcome {
    let t = trace_of("counter")?;
    let mut expected = vec![sym("starting")];
    expected.extend(std::iter::repeat_n(sym("incr"), 5));
    expected.extend([sym("too-many"), sym("finished")]);
    let got = messages(&t);
    ensure(got == expected, || format!("messages {got:?}"))?;
    let progress = progress_values(&t);
    ensure(progress == [0, 1, 2, 3, 4, 5], || {
        format!("progress {progress:?}")
    })?;
    let net =
        run_network(find("counter").unwrap(), &RunOptions::default()).map_err(|e| e.to_string())?;
    ensure(
        net.aggregate_set()
            .iter()
            .all(|a| a.label() != Some("list")),
        || "progress assertion survives quiescence".into(),
    )?;

    let t = trace_of("counter-interrupt")?;
    let got = messages(&t);
    ensure(
        got.contains(&sym("interrupted"))
            && !got.contains(&sym("too-many"))
            && got.last() == Some(&sym("finished")),
        || format!("interrupt messages {got:?}"),
    )?;
    // The counting actor is the one that publishes its progress.
    let counting = t
        .iter()
        .find(|e| matches!(&e.event, TraceEvent::PatchOut(p) if p.added().iter().any(|a| a.label() == Some("list"))))
        .map(|e| e.actor.clone())
        .ok_or("no progress assertion")?;
    let delivered = t
        .iter()
        .filter(|e| e.actor == counting)
        .take_while(|e| !matches!(&e.event, TraceEvent::EventMessage(m) if *m == sym("interrupt")))
        .filter(|e| matches!(&e.event, TraceEvent::EventMessage(m) if *m == sym("incr")))
        .count() as i64;
    let returned = t
        .iter()
        .filter_map(|e| match &e.event {
            TraceEvent::PatchOut(p) if e.actor == counting => p
                .added()
                .iter()
                .find(|a| a.label() == Some("state-result"))
                .and_then(|a| a.fields()[1].fields().first().and_then(P::as_int)),
            _ => None,
        })
        .next()
        .ok_or("no result returned")?;
    ensure(returned == delivered && delivered == 2, || {
        format!("final count {returned}, increments delivered {delivered}")
    })?;
    Ok(format!(
        "'starting, 5 x 'incr, 'too-many, 'finished; interrupted at count {returned}"
    ))
}

// 3 -------------------------------------------------------------------------

fn novel_views(t: &[TraceEntry]) -> Vec<Vec<P>> {
    let interest = P::observe(P::record("file", [P::string("novel.txt"), P::Wildcard]));
    let Some(monitor) = t
        .iter()
        .find(|e| matches!(&e.event, TraceEvent::PatchOut(p) if p.added().contains(&interest)))
        .map(|e| e.actor.clone())
    else {
        return vec![];
    };
    t.iter()
        .filter(|e| e.actor == monitor)
        .filter_map(|e| match &e.event {
            TraceEvent::PatchIn(p) if !p.added().is_empty() => {
                Some(p.added().iter().cloned().collect())
            }
            _ => None,
        })
        .collect()
}

fn file_system() -> Outcome {
    let file = |c: P| P::record("file", [P::string("novel.txt"), c]);
    let expected = vec![
        vec![file(P::boolean(false))],
        vec![file(P::string("It was a dark and stormy night"))],
    ];
    let lens = P::record("file", [P::Wildcard, P::Wildcard]);
    let mut traces = Vec::new();
    for name in ["file-system-plain", "file-system-reactive"] {
        let t = trace_of(name)?;
        let views = novel_views(&t);
        ensure(views == expected, || {
            format!("{name}: monitor saw {views:?}")
        })?;
        let net =
            run_network(find(name).unwrap(), &RunOptions::default()).map_err(|e| e.to_string())?;
        let left: Vec<_> = net
            .aggregate_set()
            .into_iter()
            .filter(|a| a.label() == Some("file"))
            .collect();
        ensure(left.is_empty(), || format!("{name}: {left:?} remains"))?;
        traces.push(t);
    }
    ensure(traces_equivalent(&traces[0], &traces[1], &lens), || {
        "plain and reactive file systems differ".into()
    })?;
    let bank = trace_of("bank-account-plain")?;
    ensure(
        !traces_equivalent(&trace_of("counter")?, &bank, &P::Wildcard),
        || "unrelated scenarios compare equal".into(),
    )?;
    Ok("false, then the saved text; cache entry withdrawn; plain ~ reactive".into())
}

// 4 -------------------------------------------------------------------------

fn vocabulary() -> Vec<P> {
    let a = |x| P::record("a", [x]);
    let b = |x, y| P::record("b", [x, y]);
    vec![
        a(P::int(1)),
        a(P::int(2)),
        b(P::int(1), P::int(1)),
        b(P::int(1), P::int(2)),
        P::observe(a(P::Wildcard)),
        P::observe(a(P::int(2))),
        P::observe(b(P::int(1), P::Wildcard)),
        P::observe(P::observe(a(P::Wildcard))),
        P::observe(P::Wildcard),
    ]
}

/// Independent overlap check used by the oracle below.
fn unifiable(p: &P, q: &P) -> bool {
    match (p, q) {
        (P::Wildcard, _) | (_, P::Wildcard) => true,
        (P::Atom(x), P::Atom(y)) => x == y,
        (
            P::Record {
                label: l,
                fields: fs,
            },
            P::Record {
                label: m,
                fields: gs,
            },
        ) => l == m && fs.len() == gs.len() && fs.iter().zip(gs).all(|(f, g)| unifiable(f, g)),
        _ => false,
    }
}

fn brute_visible(aggregate: &AssertionSet, mine: &AssertionSet) -> AssertionSet {
    aggregate
        .iter()
        .filter(|a| mine.iter().filter_map(P::observed).any(|p| unifiable(p, a)))
        .cloned()
        .collect()
}

fn die(k: usize) -> P {
    P::record("die", [P::int(k as i64)])
}

fn retraction_on_failure() -> Outcome {
    let strategy = (
        prop::collection::vec(
            prop::collection::btree_set(prop::sample::select(vocabulary()), 0..=8),
            1..=6,
        ),
        any::<prop::sample::Index>(),
        any::<bool>(),
    );
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    });
    let changed_observers = std::cell::Cell::new(0usize);
    let result = runner.run(&strategy, |(sets, victim, by_failure)| {
        let victim = victim.index(sets.len());
        let mut net = Network::new();
        net.enable_oracle();
        let mut model: Vec<AssertionSet> = Vec::new();
        let mut ids = Vec::new();
        for (k, s) in sets.iter().enumerate() {
            let mut mine = s.clone();
            mine.insert(P::observe(die(k)));
            let me = die(k);
            let behaviour = leaf((), move |e, _| match e {
                Event::Message(m) if *m == me => Transition::Failure("told to die".into()),
                _ => Transition::Unchanged,
            });
            ids.push(net.spawn_leaf(behaviour, vec![Action::Patch(Patch::assert(mine.clone()))]));
            model.push(mine);
        }
        net.run_until_quiescent(10_000).unwrap();

        let union = |skip: Option<usize>| -> AssertionSet {
            model
                .iter()
                .enumerate()
                .filter(|(k, _)| Some(*k) != skip)
                .flat_map(|(_, s)| s.iter().cloned())
                .collect()
        };
        let before_all = union(None);
        prop_assert_eq!(net.aggregate_set(), before_all.clone());
        let before: Vec<AssertionSet> = model
            .iter()
            .map(|m| brute_visible(&before_all, m))
            .collect();

        if by_failure {
            net.interpret_action(&ids[victim], Action::Message(die(victim)));
            let mut budget = 100;
            while net.contains(&ids[victim]) && budget > 0 {
                net.dispatch_one().unwrap();
                budget -= 1;
            }
            prop_assert!(!net.contains(&ids[victim]));
        } else {
            net.terminate_actor(&ids[victim], Termination::Crash("killed".into()));
        }

        let after_all = union(Some(victim));
        prop_assert_eq!(net.aggregate_set(), after_all.clone());
        for a in model[victim].difference(&after_all) {
            prop_assert!(
                !net.aggregate().contains(a),
                "{} outlived its only asserter",
                a
            );
        }
        let mut pending: BTreeMap<ActorId, Vec<Patch>> = BTreeMap::new();
        for (id, ev) in net.pending_events() {
            if let Event::Patch(p) = ev {
                pending.entry(id.clone()).or_default().push(p.clone());
            }
        }
        for (k, id) in ids.iter().enumerate() {
            if k == victim {
                continue;
            }
            let after = brute_visible(&after_all, &model[k]);
            let patches = pending.remove(id).unwrap_or_default();
            if after == before[k] {
                prop_assert!(
                    patches.is_empty(),
                    "{} notified needlessly: {:?}",
                    id,
                    patches
                );
            } else {
                changed_observers.set(changed_observers.get() + 1);
                let lost: AssertionSet = before[k].difference(&after).cloned().collect();
                prop_assert_eq!(patches, vec![Patch::retract(lost)]);
            }
        }
        prop_assert!(pending.is_empty());
        net.run_until_quiescent(10_000).unwrap();
        net.check_consistency().unwrap();
        Ok(())
    });
    result.map_err(|e| e.to_string())?;
    Ok(format!(
        "1000 random networks, {} observers notified",
        changed_observers.get()
    ))
}

// 5 -------------------------------------------------------------------------

fn patch_algebra() -> Outcome {
    let universe: Vec<P> = (0..6).map(|i| P::record("x", [P::int(i)])).collect();
    let set = || prop::collection::btree_set(prop::sample::select(universe.clone()), 0..=6);
    let patch = || {
        (set(), set()).prop_map(|(a, r)| {
            let r: AssertionSet = r.difference(&a).cloned().collect();
            Patch::new(a, r).unwrap()
        })
    };
    let strategy = (set(), set(), patch(), patch(), patch());
    let mut runner = TestRunner::new(Config {
        cases: 10_000,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&strategy, |(s, t, p, q, r)| {
            // Reference semantics: (s \ removed) ∪ added.
            let naive = |p: &Patch, s: &AssertionSet| -> AssertionSet {
                s.difference(p.removed())
                    .chain(p.added())
                    .cloned()
                    .collect()
            };
            prop_assert_eq!(p.apply(&s), naive(&p, &s));
            prop_assert_eq!(p.then(&q).apply(&s), q.apply(&p.apply(&s)));
            prop_assert_eq!(p.then(&q).then(&r), p.then(&q.then(&r)));
            prop_assert_eq!(Patch::empty().then(&p), p.clone());
            prop_assert_eq!(p.then(&Patch::empty()), p.clone());
            prop_assert_eq!(Patch::empty().apply(&s), s.clone());
            let d = delta(&s, &t);
            prop_assert_eq!(d.apply(&s), t.clone());
            prop_assert!(d.added().is_disjoint(&s) && d.removed().is_subset(&s));
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("10000 cases over 6 assertions: apply, seq, identity, delta".into())
}

// 6 -------------------------------------------------------------------------

fn visibility_oracle() -> Outcome {
    const SEEDS: u64 = 500;
    let mut runs = 0;
    let mut interleavings = 0;
    for s in scenarios() {
        let mut distinct = BTreeSet::new();
        for seed in 0..SEEDS {
            let opts = RunOptions {
                oracle: true,
                shuffle: Some(seed),
                max_steps: None,
            };
            let mut net =
                run_network(s, &opts).map_err(|e| format!("{} seed {seed}: {e}", s.name))?;
            net.check_consistency()
                .map_err(|e| format!("{} seed {seed}: {e}", s.name))?;
            distinct.insert(render(&net.take_trace()));
            runs += 1;
        }
        interleavings += distinct.len();
    }
    // The shuffle has to actually reorder something for this to mean anything.
    ensure(interleavings > scenarios().len(), || {
        "shuffling never changed a trace".into()
    })?;
    Ok(format!(
        "{runs} shuffled runs ({} scenarios x {SEEDS} seeds, {interleavings} distinct traces), no divergence",
        scenarios().len()
    ))
}

// 7 -------------------------------------------------------------------------

fn group_asserting(items: &BTreeSet<P>) -> StateGroup {
    let mut spec = StateSpec::new();
    for a in items {
        let a = a.clone();
        spec = spec.assert(move |_| Ok(a.clone()));
    }
    StateGroup::new(spec, Scope::new()).unwrap()
}

fn retracted(out: &[Action]) -> Vec<P> {
    out.iter()
        .filter_map(|a| match a {
            Action::Patch(p) => Some(p.removed().iter().cloned().collect::<Vec<_>>()),
            _ => None,
        })
        .flatten()
        .collect()
}

fn mux_non_interference() -> Outcome {
    let universe: Vec<P> = (0..5).map(|i| P::record("deposit", [P::int(i)])).collect();
    let set = || prop::collection::btree_set(prop::sample::select(universe.clone()), 0..=5);
    let mut runner = TestRunner::new(Config {
        cases: 2000,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&(set(), set(), any::<bool>()), |(a, b, first_a)| {
            let shared: BTreeSet<P> = a.intersection(&b).cloned().collect();
            let mut mux = Mux::new();
            let (mut ga, mut gb) = (group_asserting(&a), group_asserting(&b));
            let mut out = Vec::new();
            ga.install(&mut mux, &mut out).unwrap();
            gb.install(&mut mux, &mut out).unwrap();
            prop_assert_eq!(
                mux.asserted(),
                a.union(&b).cloned().collect::<AssertionSet>()
            );
            let (first, second, first_set) = if first_a {
                (&mut ga, &mut gb, &a)
            } else {
                (&mut gb, &mut ga, &b)
            };
            let mut out = Vec::new();
            first.teardown(&mut mux, &mut out);
            let gone = retracted(&out);
            prop_assert!(
                gone.iter().all(|x| !shared.contains(x)),
                "shared assertion retracted early"
            );
            prop_assert_eq!(gone.len(), first_set.difference(&shared).count());
            let mut out = Vec::new();
            second.teardown(&mut mux, &mut out);
            let gone = retracted(&out);
            for x in &shared {
                prop_assert_eq!(gone.iter().filter(|y| *y == x).count(), 1);
            }
            prop_assert!(mux.asserted().is_empty());
            Ok(())
        })
        .map_err(|e| e.to_string())?;

    // The same through a running actor: two states watching deposits.
    let watch = || {
        StateSpec::new().on(
            EventSpec::message(dataspace_core::SurfacePattern::record(
                "deposit",
                [dataspace_core::SurfacePattern::bind("a")],
            )),
            |_| Ok(vec![]),
        )
    };
    let mut mux = Mux::new();
    let mut out = Vec::new();
    let mut g1 = StateGroup::new(watch(), Scope::new()).unwrap();
    let mut g2 = StateGroup::new(watch(), Scope::new()).unwrap();
    g1.install(&mut mux, &mut out).unwrap();
    g2.install(&mut mux, &mut out).unwrap();
    out.clear();
    g1.teardown(&mut mux, &mut out);
    ensure(out.is_empty(), || format!("first teardown emitted {out:?}"))?;
    g2.teardown(&mut mux, &mut out);
    ensure(
        retracted(&out) == [P::observe(P::record("deposit", [P::Wildcard]))],
        || format!("second teardown emitted {out:?}"),
    )?;
    Ok("2000 random facet pairs; shared assertions retracted exactly once, last".into())
}

// 8 -------------------------------------------------------------------------

fn determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_dataspace");
    for s in scenarios() {
        let a = render(&run_scenario(s, &RunOptions::default()).map_err(|e| e.to_string())?);
        let b = render(&run_scenario(s, &RunOptions::default()).map_err(|e| e.to_string())?);
        ensure(a == b, || format!("{} is not deterministic", s.name))?;
        let run = |args: &[&str]| {
            Command::new(exe)
                .args(args)
                .output()
                .map_err(|e| e.to_string())
        };
        let first = run(&["run", s.name])?;
        let second = run(&["run", s.name])?;
        ensure(
            first.status.success() && first.stdout == second.stdout,
            || format!("`run {}` differs between invocations", s.name),
        )?;
        ensure(first.stdout == a.as_bytes(), || {
            format!("`run {}` differs from the library", s.name)
        })?;
        let golden = fs::read_to_string(default_goldens_dir().join(s.golden_file()))
            .map_err(|e| e.to_string())?;
        compare_golden(&golden, &a).map_err(|m| format!("{}: {m}", s.name))?;
        let check = run(&["check", s.name])?;
        ensure(check.status.success(), || {
            format!("`check {}` failed", s.name)
        })?;
    }
    Ok(format!(
        "{} scenarios replay byte-identically and match their goldens",
        scenarios().len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("bank account reproduction", bank_account),
        ("counter reproduction", counter),
        ("file system reproduction", file_system),
        ("retraction on failure", retraction_on_failure),
        ("patch algebra laws", patch_algebra),
        ("visibility oracle equivalence", visibility_oracle),
        ("mux non-interference", mux_non_interference),
        ("determinism and goldens", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail}; {secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
