//! Vector clocks and the happen-before relation on events and local states.
//!
//! Processes are numbered `0..n`. A clock component `c[k]` counts the events
//! of process `k` known to have happened, so the event `e_i` on process `k`
//! carries `c[k] == i + 1`. A local state `s_i` is the interval between `e_i`
//! and `e_{i+1}` and is timestamped with the clock of `e_i`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Local predicate name to truth value.
pub type Payload = BTreeMap<String, bool>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VectorClock(Vec<u32>);

impl VectorClock {
    pub fn zero(n: usize) -> Self {
        VectorClock(vec![0; n])
    }

    pub fn from_components(components: Vec<u32>) -> Self {
        VectorClock(components)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, k: usize) -> u32 {
        self.0[k]
    }

    pub(crate) fn tick(&mut self, k: usize) {
        self.0[k] += 1;
    }

    /// Componentwise `<=`.
    pub fn dominated_by(&self, other: &VectorClock) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for VectorClock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Componentwise maximum.
pub fn merge(a: &VectorClock, b: &VectorClock) -> Result<VectorClock> {
    if a.len() != b.len() {
        return Err(Error::ClockLength { left: a.len(), right: b.len() });
    }
    Ok(VectorClock(a.0.iter().zip(&b.0).map(|(x, y)| *x.max(y)).collect()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Internal,
    Send,
    Receive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EventId {
    pub process: usize,
    pub index: u32,
    pub kind: EventKind,
}

/// `a -> b` for two timestamped events of one run.
pub fn event_happens_before(a: (&EventId, &VectorClock), b: (&EventId, &VectorClock)) -> bool {
    let (ea, ca) = a;
    let (eb, cb) = b;
    if ea.process == eb.process {
        return ea.index < eb.index;
    }
    // b has observed a's prefix on a's process.
    ca.get(ea.process) <= cb.get(ea.process)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalState {
    pub process: usize,
    pub index: u32,
    pub clock: VectorClock,
    pub seq: u64,
    #[serde(default)]
    pub payload: Payload,
}

impl LocalState {
    pub fn new(process: usize, index: u32, clock: VectorClock, payload: Payload) -> Self {
        LocalState { process, index, clock, seq: index as u64, payload }
    }

    /// Checks the clock/index invariant.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.process >= n {
            return Err(Error::ProcessOutOfRange(self.process, n));
        }
        if self.clock.len() != n {
            return Err(Error::ClockLength { left: self.clock.len(), right: n });
        }
        if self.clock.get(self.process) != self.index + 1 {
            return Err(Error::Config(format!(
                "state {}:{} has own clock component {}, expected {}",
                self.process,
                self.index,
                self.clock.get(self.process),
                self.index + 1
            )));
        }
        Ok(())
    }
}

/// `s1 -> s2`: the ending event of `s1` happens before (or is) the beginning
/// event of `s2`.
pub fn state_happens_before(s1: &LocalState, s2: &LocalState) -> bool {
    let i = s1.process;
    if i == s2.process {
        return s1.index < s2.index;
    }
    // s1 ends with e_{index+1}, the (index+2)-th event on process i.
    s2.clock.get(i) >= s1.index + 2
}

pub fn concurrent(s1: &LocalState, s2: &LocalState) -> Result<bool> {
    if s1.process == s2.process {
        return Err(Error::SameProcess(s1.process));
    }
    Ok(!state_happens_before(s1, s2) && !state_happens_before(s2, s1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vc(c: &[u32]) -> VectorClock {
        VectorClock::from_components(c.to_vec())
    }

    fn ev(process: usize, index: u32) -> EventId {
        EventId { process, index, kind: EventKind::Internal }
    }

    #[test]
    fn merge_examples() {
        assert_eq!(merge(&vc(&[2, 0]), &vc(&[0, 1])).unwrap(), vc(&[2, 1]));
        assert_eq!(merge(&vc(&[1, 1]), &vc(&[1, 1])).unwrap(), vc(&[1, 1]));
        assert_eq!(merge(&vc(&[0, 3]), &vc(&[2, 0])).unwrap(), vc(&[2, 3]));
        assert!(matches!(merge(&vc(&[0, 3]), &vc(&[2, 0, 1])), Err(Error::ClockLength { left: 2, right: 3 })));
    }

    #[test]
    fn event_order_examples() {
        // a = e^(0)_0 with clock [1,0]; b on process 1 saw it.
        assert!(event_happens_before((&ev(0, 0), &vc(&[1, 0])), (&ev(1, 1), &vc(&[2, 1]))));
        // incomparable clocks
        assert!(!event_happens_before((&ev(0, 1), &vc(&[2, 0])), (&ev(1, 0), &vc(&[0, 1]))));
        // irreflexive
        let a = ev(0, 1);
        assert!(!event_happens_before((&a, &vc(&[2, 0])), (&a, &vc(&[2, 0]))));
    }

    #[test]
    fn same_process_states_are_never_concurrent() {
        let s = LocalState::new(0, 3, vc(&[4, 0]), Payload::new());
        assert!(!state_happens_before(&s, &s));
        assert!(matches!(concurrent(&s, &s), Err(Error::SameProcess(0))));
    }

    #[test]
    fn validate_checks_own_component() {
        let good = LocalState::new(1, 2, vc(&[0, 3]), Payload::new());
        assert!(good.validate(2).is_ok());
        let bad = LocalState::new(1, 2, vc(&[0, 2]), Payload::new());
        assert!(bad.validate(2).is_err());
        assert!(good.validate(1).is_err());
    }
}
