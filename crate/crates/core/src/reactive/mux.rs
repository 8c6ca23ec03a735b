use crate::bag::{Bag, Transition};
use crate::patch::{AssertionSet, Patch};
use crate::value::Pattern;

/// Reference-counts the assertions contributed by one actor's state groups
/// so that overlapping contributions never step on each other. Only 0→1
/// and 1→0 transitions become patch actions.
#[derive(Debug, Default, Clone)]
pub struct Mux {
    bag: Bag<Pattern>,
}

impl Mux {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replaces one contributor's set `old` by `new` and returns the change
    /// in the actor's outbound assertion set.
    pub fn update(&mut self, old: &AssertionSet, new: &AssertionSet) -> Patch {
        let mut added = AssertionSet::new();
        let mut removed = AssertionSet::new();
        for a in new.difference(old) {
            if self.bag.insert(a) == Transition::AbsentToPresent {
                added.insert(a.clone());
            }
        }
        for r in old.difference(new) {
            if self.bag.remove(r) == Transition::PresentToAbsent {
                removed.insert(r.clone());
            }
        }
        Patch::new(added, removed).expect("set differences are disjoint")
    }

    pub fn add(&mut self, items: &AssertionSet) -> Patch {
        self.update(&AssertionSet::new(), items)
    }

    pub fn remove(&mut self, items: &AssertionSet) -> Patch {
        self.update(items, &AssertionSet::new())
    }

    /// The actor's outbound assertion set.
    pub fn asserted(&self) -> AssertionSet {
        self.bag.support().cloned().collect()
    }

    pub fn count(&self, p: &Pattern) -> usize {
        self.bag.count(p)
    }
}
