//! The bank account: a manager holding a balance, an observer of it, and an
//! updater that deposits 100 then -30 once somebody listens for deposits.

use dataspace_core::reactive::{reactive_actor, EventSpec, Script, StateSpec};
use dataspace_core::{
    leaf, Action, Event, Network, Patch, Pattern as P, Spawn, SurfacePattern as S, Transition,
};

pub const DEPOSITS: [i64; 2] = [100, -30];

fn account(balance: i64) -> P {
    P::record("account", [P::int(balance)])
}

fn deposit(amount: P) -> P {
    P::record("deposit", [amount])
}

fn any_deposit() -> P {
    deposit(P::Wildcard)
}

pub fn manager() -> Spawn {
    let behaviour = leaf(0i64, |event, balance| match event {
        Event::Message(m) if m.label() == Some("deposit") => {
            let Some(amount) = m.fields().first().and_then(P::as_int) else {
                return Transition::Unchanged;
            };
            let next = balance + amount;
            let patch =
                Patch::new([account(next)].into(), [account(*balance)].into()).unwrap_or_default();
            Transition::Continue(next, vec![Action::Patch(patch)])
        }
        _ => Transition::Unchanged,
    });
    Spawn::leaf(
        behaviour,
        vec![Action::Patch(Patch::assert([
            account(0),
            P::observe(any_deposit()),
        ]))],
    )
}

/// Balances show up as `patch-in` entries in the trace.
pub fn observer() -> Spawn {
    Spawn::leaf(
        leaf((), |_, _| Transition::Unchanged),
        vec![Action::Patch(Patch::assert([P::observe(account_any())]))],
    )
}

fn account_any() -> P {
    P::record("account", [P::Wildcard])
}

pub fn updater() -> Spawn {
    let behaviour = leaf((), |event, _| match event {
        Event::Patch(p) if p.added().contains(&P::observe(any_deposit())) => {
            let mut out: Vec<Action> = DEPOSITS
                .iter()
                .map(|&a| Action::Message(deposit(P::int(a))))
                .collect();
            out.push(Action::Quit);
            Transition::Continue((), out)
        }
        _ => Transition::Unchanged,
    });
    Spawn::leaf(
        behaviour,
        vec![Action::Patch(Patch::assert([P::observe(P::observe(
            any_deposit(),
        ))]))],
    )
}

pub fn build_plain(net: &mut Network) {
    net.spawn(manager());
    net.spawn(observer());
    net.spawn(updater());
}

/// The plain actors inside a nested network.
pub fn build_nested(net: &mut Network) {
    net.spawn_nested_network(vec![manager(), observer(), updater()]);
}

pub fn reactive_manager() -> Script {
    Script::new().state(
        &[],
        StateSpec::new()
            .collect("balance", 0)
            .assert(|s| Ok(account(s.int("balance")?)))
            .on(
                EventSpec::message(S::record("deposit", [S::bind("amount")])),
                |cx| Ok(vec![P::int(cx.int("balance")? + cx.int("amount")?)]),
            ),
    )
}

pub fn reactive_observer() -> Script {
    Script::new().state(
        &[],
        StateSpec::new().on(
            EventSpec::asserted(S::record("account", [S::bind("balance")])),
            |_| Ok(vec![]),
        ),
    )
}

pub fn reactive_updater() -> Script {
    let mut script = Script::new().state(
        &[],
        StateSpec::until(EventSpec::asserted(P::observe(any_deposit()))),
    );
    for a in DEPOSITS {
        script = script.send(deposit(P::int(a)));
    }
    script
}

pub fn build_reactive(net: &mut Network) {
    reactive_actor(net, reactive_manager());
    reactive_actor(net, reactive_observer());
    reactive_actor(net, reactive_updater());
}
