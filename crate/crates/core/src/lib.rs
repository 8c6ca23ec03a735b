//! A dataspace actor runtime.
//!
//! Actors share a *dataspace*: a bag of assertions each of which survives
//! only while some actor keeps asserting it. Interest is itself an assertion
//! (`observe(pattern)`), so subscriptions route both messages and state-change
//! notifications ([`Patch`]es). Termination retracts everything an actor
//! asserted, which doubles as a failure signal for anybody watching.
//!
//! [`reactive`] layers scripts, blocking states and facets on top of the
//! plain behaviour-function interface in [`network`].

pub mod bag;
pub mod codec;
pub mod error;
pub mod network;
pub mod patch;
pub mod projection;
pub mod reactive;
pub mod trace;
pub mod value;

pub use error::{NetworkError, PatternError};
pub use network::{
    leaf, Action, ActorId, Behaviour, Dispatch, Event, Network, Spawn, Step, Termination,
    Transition,
};
pub use patch::{delta, interests_of, visible, AssertionSet, Patch};
pub use projection::{
    compile_surface, project_assertions, CaptureTuple, CompiledPattern, Projection, SurfacePattern,
};
pub use value::{intersect, matches, subsumes, Atom, Pattern};
