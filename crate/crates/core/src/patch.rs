//! Assertion sets and patches.
//!
//! A [`Patch`] is the only way shared state changes: actors send patches to
//! their network to edit their own assertions, and the network sends patches
//! back describing how the portion of the dataspace each actor is interested
//! in has changed.

use std::collections::BTreeSet;

use serde_json::{json, Value as Json};

use crate::codec::{pattern_from_json, pattern_to_json};
use crate::error::PatternError;
use crate::value::{overlaps, Pattern};

pub type AssertionSet = BTreeSet<Pattern>;

/// Disjoint sets of added and removed assertions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Patch {
    added: AssertionSet,
    removed: AssertionSet,
}

impl Patch {
    /// Returns `None` if `added` and `removed` overlap.
    pub fn new(added: AssertionSet, removed: AssertionSet) -> Option<Self> {
        added
            .is_disjoint(&removed)
            .then_some(Patch { added, removed })
    }

    pub fn empty() -> Self {
        Patch::default()
    }

    pub fn assert(items: impl IntoIterator<Item = Pattern>) -> Self {
        Patch {
            added: items.into_iter().collect(),
            removed: AssertionSet::new(),
        }
    }

    pub fn retract(items: impl IntoIterator<Item = Pattern>) -> Self {
        Patch {
            added: AssertionSet::new(),
            removed: items.into_iter().collect(),
        }
    }

    pub fn added(&self) -> &AssertionSet {
        &self.added
    }

    pub fn removed(&self) -> &AssertionSet {
        &self.removed
    }

    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty()
    }

    /// `(s \ removed) ∪ added`
    pub fn apply(&self, s: &AssertionSet) -> AssertionSet {
        s.difference(&self.removed)
            .chain(self.added.iter())
            .cloned()
            .collect()
    }

    pub fn apply_in_place(&self, s: &mut AssertionSet) {
        for r in &self.removed {
            s.remove(r);
        }
        s.extend(self.added.iter().cloned());
    }

    /// Sequential composition: the patch equivalent to applying `self` and
    /// then `next`.
    pub fn then(&self, next: &Patch) -> Patch {
        let added = self
            .added
            .difference(&next.removed)
            .chain(next.added.iter())
            .cloned()
            .collect();
        let removed = self
            .removed
            .difference(&next.added)
            .chain(next.removed.iter())
            .cloned()
            .collect();
        Patch { added, removed }
    }

    /// Drops additions already in `current` and removals not in it. The
    /// result has the same effect on `current` as `self`.
    pub fn clamp(&self, current: &AssertionSet) -> Patch {
        Patch {
            added: self.added.difference(current).cloned().collect(),
            removed: self.removed.intersection(current).cloned().collect(),
        }
    }

    pub fn to_json(&self) -> Json {
        json!({
            "added": self.added.iter().map(pattern_to_json).collect::<Vec<_>>(),
            "removed": self.removed.iter().map(pattern_to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(j: &Json) -> Result<Self, PatternError> {
        let side = |key: &str| -> Result<AssertionSet, PatternError> {
            j.get(key)
                .and_then(Json::as_array)
                .ok_or_else(|| PatternError::MalformedText(format!("patch lacks `{key}` array")))?
                .iter()
                .map(pattern_from_json)
                .collect()
        };
        Patch::new(side("added")?, side("removed")?)
            .ok_or_else(|| PatternError::MalformedText("patch sides overlap".into()))
    }
}

/// The patch turning `before` into `after`.
pub fn delta(before: &AssertionSet, after: &AssertionSet) -> Patch {
    Patch {
        added: after.difference(before).cloned().collect(),
        removed: before.difference(after).cloned().collect(),
    }
}

/// `{ p | observe(p) ∈ s }`
pub fn interests_of<'a>(s: impl IntoIterator<Item = &'a Pattern>) -> AssertionSet {
    s.into_iter()
        .filter_map(Pattern::observed)
        .cloned()
        .collect()
}

/// Elements of `aggregate` overlapping at least one interest, delivered whole.
pub fn visible<'a>(
    aggregate: impl IntoIterator<Item = &'a Pattern>,
    interests: &AssertionSet,
) -> AssertionSet {
    aggregate
        .into_iter()
        .filter(|a| interests.iter().any(|p| overlaps(p, a)))
        .cloned()
        .collect()
}
