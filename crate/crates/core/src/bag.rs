use std::collections::BTreeMap;

/// Outcome of changing an element's count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    AbsentToPresent,
    PresentToAbsent,
    PresentToPresent,
    /// Removal of an element that was not there; the bag is unchanged.
    AbsentToAbsent,
}

/// A multiset with strictly positive counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bag<T: Ord> {
    counts: BTreeMap<T, usize>,
}

impl<T: Ord> Default for Bag<T> {
    fn default() -> Self {
        Bag {
            counts: BTreeMap::new(),
        }
    }
}

impl<T: Ord + Clone> Bag<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, item: &T) -> Transition {
        match self.counts.get_mut(item) {
            Some(n) => {
                *n += 1;
                Transition::PresentToPresent
            }
            None => {
                self.counts.insert(item.clone(), 1);
                Transition::AbsentToPresent
            }
        }
    }

    pub fn remove(&mut self, item: &T) -> Transition {
        match self.counts.get_mut(item) {
            None => Transition::AbsentToAbsent,
            Some(n) if *n > 1 => {
                *n -= 1;
                Transition::PresentToPresent
            }
            Some(_) => {
                self.counts.remove(item);
                Transition::PresentToAbsent
            }
        }
    }

    pub fn count(&self, item: &T) -> usize {
        self.counts.get(item).copied().unwrap_or(0)
    }

    pub fn contains(&self, item: &T) -> bool {
        self.counts.contains_key(item)
    }

    /// Distinct elements in order.
    pub fn support(&self) -> impl Iterator<Item = &T> {
        self.counts.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, usize)> {
        self.counts.iter().map(|(k, n)| (k, *n))
    }

    pub fn distinct_len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}
