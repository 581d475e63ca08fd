use std::collections::BTreeMap;

use crate::clock::LocalState;

/// Per-process FIFO reassembly: buffers out-of-order arrivals and releases
/// the gapless prefix.
#[derive(Clone, Debug, Default)]
pub struct ReorderQueue {
    buffered: BTreeMap<u64, LocalState>,
    next_expected: u64,
    duplicates: u64,
}

impl ReorderQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn next_expected(&self) -> u64 {
        self.next_expected
    }

    pub fn buffered(&self) -> usize {
        self.buffered.len()
    }

    /// Arrivals dropped because their sequence number was already seen.
    pub fn duplicates(&self) -> u64 {
        self.duplicates
    }

    pub fn on_receive(&mut self, s: LocalState) -> Vec<LocalState> {
        if s.seq < self.next_expected || self.buffered.contains_key(&s.seq) {
            self.duplicates += 1;
            log::warn!("dropping duplicate seq {} from process {}", s.seq, s.process);
            return Vec::new();
        }
        self.buffered.insert(s.seq, s);
        let mut out = Vec::new();
        while let Some(s) = self.buffered.remove(&self.next_expected) {
            out.push(s);
            self.next_expected += 1;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::{Payload, VectorClock};

    fn st(seq: u64) -> LocalState {
        let mut s = LocalState::new(0, seq as u32, VectorClock::from_components(vec![seq as u32 + 1]), Payload::new());
        s.seq = seq;
        s
    }

    fn seqs(v: Vec<LocalState>) -> Vec<u64> {
        v.into_iter().map(|s| s.seq).collect()
    }

    #[test]
    fn in_order_is_immediate() {
        let mut q = ReorderQueue::new();
        for i in 0..3 {
            assert_eq!(seqs(q.on_receive(st(i))), vec![i]);
        }
    }

    #[test]
    fn releases_gapless_prefix() {
        let mut q = ReorderQueue::new();
        assert!(q.on_receive(st(2)).is_empty());
        assert_eq!(seqs(q.on_receive(st(0))), vec![0]);
        assert_eq!(seqs(q.on_receive(st(1))), vec![1, 2]);
        assert_eq!(q.buffered(), 0);
    }

    #[test]
    fn duplicates_are_counted() {
        let mut q = ReorderQueue::new();
        q.on_receive(st(0));
        q.on_receive(st(2));
        assert!(q.on_receive(st(0)).is_empty());
        assert!(q.on_receive(st(2)).is_empty());
        assert_eq!(q.duplicates(), 2);
        assert_eq!(seqs(q.on_receive(st(1))), vec![1, 2]);
    }
}
