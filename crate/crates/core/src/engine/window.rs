use std::collections::VecDeque;

use crate::clock::LocalState;

/// The latest `capacity` delivered states of one process. Indices inside the
/// buffer are contiguous and increasing.
#[derive(Clone, Debug)]
pub struct WindowBuffer {
    states: VecDeque<LocalState>,
    capacity: usize,
}

impl WindowBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "window capacity must be positive");
        WindowBuffer { states: VecDeque::new(), capacity }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Appends `s` and returns the state evicted to stay within capacity.
    pub fn push(&mut self, s: LocalState) -> Option<LocalState> {
        if let Some(last) = self.states.back() {
            debug_assert_eq!(last.index + 1, s.index, "window indices must be contiguous");
        }
        self.states.push_back(s);
        if self.states.len() > self.capacity {
            self.states.pop_front()
        } else {
            None
        }
    }

    /// `W_min`, the oldest state.
    pub fn min(&self) -> Option<&LocalState> {
        self.states.front()
    }

    /// `W_max`, the latest state.
    pub fn max(&self) -> Option<&LocalState> {
        self.states.back()
    }

    pub fn range(&self) -> Option<(u32, u32)> {
        Some((self.min()?.index, self.max()?.index))
    }

    pub fn contains_index(&self, index: u32) -> bool {
        self.range().is_some_and(|(lo, hi)| (lo..=hi).contains(&index))
    }

    pub fn get(&self, index: u32) -> Option<&LocalState> {
        let lo = self.min()?.index;
        index.checked_sub(lo).and_then(|off| self.states.get(off as usize))
    }

    pub fn iter(&self) -> impl Iterator<Item = &LocalState> {
        self.states.iter()
    }
}
