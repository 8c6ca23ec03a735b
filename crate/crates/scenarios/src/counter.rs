//! The increment counter: counts `'incr` until five arrive or it is
//! interrupted, asserting its progress as it goes.

use dataspace_core::reactive::{reactive_actor, EventSpec, Script, StateSpec};
use dataspace_core::{Network, Pattern as P};

pub const LIMIT: i64 = 5;

fn sym(s: &str) -> P {
    P::symbol(s)
}

pub fn progress(count: i64) -> P {
    P::list([sym("incrs-seen-so-far"), P::int(count)])
}

pub fn counter() -> Script {
    let spec = StateSpec::new()
        .collect("count", 0)
        .assert(|s| Ok(progress(s.int("count")?)))
        .on(EventSpec::message(sym("incr")), |cx| {
            Ok(vec![P::int(cx.int("count")? + 1)])
        })
        .terminate_on(
            EventSpec::rising_edge(|s| Ok(s.int("count")? >= LIMIT)),
            |cx| {
                cx.send(sym("too-many"));
                Ok(vec![cx.get("count")?.clone()])
            },
        )
        .terminate_on(EventSpec::message(sym("interrupt")), |cx| {
            cx.send(sym("interrupted"));
            Ok(vec![cx.get("count")?.clone()])
        });
    Script::new()
        .send(sym("starting"))
        .state(&["final-count"], spec)
        .send(sym("finished"))
}

/// Waits until somebody listens for `'incr`, then sends `incrs` of them,
/// followed by `'interrupt` if asked.
pub fn driver(incrs: usize, interrupt: bool) -> Script {
    Script::new()
        .state(
            &[],
            StateSpec::until(EventSpec::asserted(P::observe(sym("incr")))),
        )
        .run(move |cx| {
            for _ in 0..incrs {
                cx.send(sym("incr"));
            }
            if interrupt {
                cx.send(sym("interrupt"));
            }
            Ok(())
        })
}

pub fn build(net: &mut Network) {
    reactive_actor(net, counter());
    reactive_actor(net, driver(LIMIT as usize, false));
}

pub const INTERRUPT_AFTER: usize = 2;

pub fn build_interrupted(net: &mut Network) {
    reactive_actor(net, counter());
    reactive_actor(net, driver(INTERRUPT_AFTER, true));
}
