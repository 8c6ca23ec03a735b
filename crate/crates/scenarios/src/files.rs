//! The file system: a store of named files, published on demand as
//! `file(name, content)` for as long as somebody is interested in that name.
//! A missing file has content `false`.

use std::collections::BTreeMap;

use dataspace_core::reactive::{reactive_actor, Cx, EventSpec, ReactiveError, Script, StateSpec};
use dataspace_core::{
    leaf, Action, Event, Network, Patch, Pattern as P, Spawn, SurfacePattern as S, Transition,
};

pub const NOVEL: &str = "novel.txt";
pub const OPENING: &str = "It was a dark and stormy night";

pub fn file(name: P, content: P) -> P {
    P::record("file", [name, content])
}

fn save(f: P) -> P {
    P::record("save", [f])
}

fn delete(name: P) -> P {
    P::record("delete", [name])
}

fn novel_interest() -> P {
    P::observe(file(P::string(NOVEL), P::Wildcard))
}

fn saving_novel() -> P {
    save(file(P::string(NOVEL), P::string(OPENING)))
}

/// `save(file(name, content))` or `delete(name)`, applied to a table.
fn apply_command(files: &BTreeMap<P, P>, m: &P) -> Option<BTreeMap<P, P>> {
    let mut next = files.clone();
    match (m.label(), m.fields()) {
        (Some("save"), [f]) if f.label() == Some("file") && f.fields().len() == 2 => {
            next.insert(f.fields()[0].clone(), f.fields()[1].clone());
        }
        (Some("delete"), [name]) => {
            next.remove(name);
        }
        _ => return None,
    }
    Some(next)
}

fn is_interest_in(a: &P, name: Option<&P>) -> Option<P> {
    let o = a.observed()?;
    match (o.label(), o.fields()) {
        (Some("file"), [n, _]) if n.is_ground() && name.is_none_or(|want| want == n) => {
            Some(n.clone())
        }
        _ => None,
    }
}

pub fn file_system() -> Spawn {
    let behaviour = leaf(BTreeMap::<P, P>::new(), |event, files| match event {
        Event::Message(m) => match apply_command(files, m) {
            Some(next) => Transition::Continue(next, vec![]),
            None => Transition::Unchanged,
        },
        Event::Patch(p) => {
            let spawns: Vec<Action> = p
                .added()
                .iter()
                .filter_map(|a| is_interest_in(a, None))
                .map(|name| {
                    let content = files.get(&name).cloned().unwrap_or(P::boolean(false));
                    Action::Spawn(file_observation(name, content))
                })
                .collect();
            if spawns.is_empty() {
                Transition::Unchanged
            } else {
                Transition::Continue(files.clone(), spawns)
            }
        }
    });
    Spawn::leaf(
        behaviour,
        vec![Action::Patch(Patch::assert([
            P::observe(save(P::Wildcard)),
            P::observe(delete(P::Wildcard)),
            P::observe(P::observe(file(P::Wildcard, P::Wildcard))),
        ]))],
    )
}

/// Publishes one file while somebody is interested in it.
fn file_observation(name: P, content: P) -> Spawn {
    let startup = vec![Action::Patch(Patch::assert([
        file(name.clone(), content.clone()),
        P::observe(save(file(name.clone(), P::Wildcard))),
        P::observe(delete(name.clone())),
        P::observe(P::observe(file(name.clone(), P::Wildcard))),
    ]))];
    let behaviour = leaf(content, move |event, content| {
        let next = match event {
            Event::Patch(p) => {
                if p.removed()
                    .iter()
                    .any(|r| is_interest_in(r, Some(&name)).is_some())
                {
                    return Transition::Continue(content.clone(), vec![Action::Quit]);
                }
                return Transition::Unchanged;
            }
            Event::Message(m) => match (m.label(), m.fields()) {
                (Some("save"), [f]) if f.fields().first() == Some(&name) => f.fields()[1].clone(),
                (Some("delete"), [n]) if *n == name => P::boolean(false),
                _ => return Transition::Unchanged,
            },
        };
        let patch = Patch::new(
            [file(name.clone(), next.clone())].into(),
            [file(name.clone(), content.clone())].into(),
        )
        .unwrap_or_default();
        Transition::Continue(next, vec![Action::Patch(patch)])
    });
    Spawn::leaf(behaviour, startup)
}

pub fn monitor() -> Spawn {
    let behaviour = leaf(0usize, |event, seen| match event {
        Event::Patch(p) => {
            let n = seen
                + p.added()
                    .iter()
                    .filter(|a| a.label() == Some("file"))
                    .count();
            let actions = if n >= 2 { vec![Action::Quit] } else { vec![] };
            Transition::Continue(n, actions)
        }
        Event::Message(_) => Transition::Unchanged,
    });
    Spawn::leaf(
        behaviour,
        vec![Action::Patch(Patch::assert([novel_interest()]))],
    )
}

pub fn writer() -> Spawn {
    let behaviour = leaf((), |event, _| match event {
        Event::Patch(p) if p.added().iter().any(|a| a.label() == Some("file")) => {
            Transition::Continue((), vec![Action::Message(saving_novel()), Action::Quit])
        }
        _ => Transition::Unchanged,
    });
    Spawn::leaf(
        behaviour,
        vec![Action::Patch(Patch::assert([novel_interest()]))],
    )
}

pub fn build_plain(net: &mut Network) {
    net.spawn(file_system());
    net.spawn(monitor());
    net.spawn(writer());
}

/// The table is kept as `list(list(name, content), ...)` sorted by name.
fn table(files: &BTreeMap<P, P>) -> P {
    P::list(files.iter().map(|(k, v)| P::list([k.clone(), v.clone()])))
}

fn untable(p: &P) -> BTreeMap<P, P> {
    p.fields()
        .iter()
        .filter_map(|e| match e.fields() {
            [k, v] => Some((k.clone(), v.clone())),
            _ => None,
        })
        .collect()
}

fn command(cx: &mut Cx, m: P) -> Result<Vec<P>, ReactiveError> {
    let files = untable(cx.get("files")?);
    let next = apply_command(&files, &m).unwrap_or(files);
    Ok(vec![table(&next)])
}

pub fn reactive_file_system() -> Script {
    let spec = StateSpec::new()
        .collect("files", table(&BTreeMap::new()))
        .on(
            EventSpec::message(S::record(
                "save",
                [S::record("file", [S::bind("name"), S::bind("content")])],
            )),
            |cx| {
                let m = saving(cx.get("name")?.clone(), cx.get("content")?.clone());
                command(cx, m)
            },
        )
        .on(
            EventSpec::message(S::record("delete", [S::bind("name")])),
            |cx| {
                let m = delete(cx.get("name")?.clone());
                command(cx, m)
            },
        )
        .on(
            EventSpec::asserted(S::observe(S::record("file", [S::bind("name"), S::Discard]))),
            |cx| {
                let name = cx.get("name")?.clone();
                let files = cx.get("files")?.clone();
                let content = untable(&files).remove(&name).unwrap_or(P::boolean(false));
                cx.detach(publish(name, content));
                Ok(vec![files])
            },
        );
    Script::new().state(&[], spec)
}

fn saving(name: P, content: P) -> P {
    save(file(name, content))
}

fn publish(name: P, content: P) -> StateSpec {
    let n = name.clone();
    StateSpec::until(EventSpec::retracted(S::observe(S::record(
        "file",
        [S::from(name.clone()), S::Discard],
    ))))
    .collect("content", content)
    .assert(move |s| Ok(file(n.clone(), s.get("content")?.clone())))
    .on(
        EventSpec::message(S::record(
            "save",
            [S::record("file", [S::from(name.clone()), S::bind("c")])],
        )),
        |cx| Ok(vec![cx.get("c")?.clone()]),
    )
    .on(
        EventSpec::message(S::record("delete", [S::from(name)])),
        |_| Ok(vec![P::boolean(false)]),
    )
}

/// Watches the novel until it has seen two versions of it, then loses
/// interest.
pub fn reactive_monitor() -> Script {
    Script::new().state(
        &[],
        StateSpec::new()
            .collect("seen", 0)
            .on(
                EventSpec::asserted(S::record(
                    "file",
                    [S::from(P::string(NOVEL)), S::bind("text")],
                )),
                |cx| Ok(vec![P::int(cx.int("seen")? + 1)]),
            )
            .stop_on(EventSpec::rising_edge(|s| Ok(s.int("seen")? >= 2))),
    )
}

pub fn reactive_writer() -> Script {
    Script::new()
        .state(
            &[],
            StateSpec::until(EventSpec::asserted(file(P::string(NOVEL), P::Wildcard))),
        )
        .send(saving_novel())
}

pub fn build_reactive(net: &mut Network) {
    reactive_actor(net, reactive_file_system());
    reactive_actor(net, reactive_monitor());
    reactive_actor(net, reactive_writer());
}
