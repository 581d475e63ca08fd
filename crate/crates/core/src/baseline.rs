//! The unwindowed reference detector: the lattice of every consistent global
//! state over all states delivered so far.
//!
//! Only the nodes added by each delivery are visited. When state `i` of
//! process `k` is delivered, the new nodes are exactly the consistent cuts
//! with coordinate `k` equal to `i`; they are enumerated by a pruned product
//! search. Definitely is tracked through the set of non-satisfying nodes
//! reachable from the bottom along non-satisfying nodes: the modality fails
//! exactly when the current top is in that set. Nodes are never removed, so
//! the set only grows.

use std::collections::HashSet;

use crate::clock::{state_happens_before, LocalState};
use crate::detect::{Property, TransitionCounter};
use crate::error::{Error, Result};
use crate::lattice::{join, Cut};

#[derive(Clone, Debug)]
pub struct LatBaseline {
    n: usize,
    prop: Property,
    delivered: Vec<Vec<LocalState>>,
    reach: HashSet<Cut>,
    top: Option<Cut>,
    nodes: usize,
    budget: usize,
    truncated: bool,
    possibly: bool,
    definitely: TransitionCounter,
    possibly_count: TransitionCounter,
}

/// Verdicts after one delivery.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BaselineStep {
    pub added: usize,
    pub definitely: bool,
    pub possibly: bool,
}

impl LatBaseline {
    /// Stops tracking (and flags truncation) once more than `budget` nodes
    /// exist.
    pub fn new(n: usize, prop: Property, budget: usize) -> Result<Self> {
        if prop.locals.len() != n {
            return Err(Error::PropertyArity { expected: prop.locals.len(), found: n });
        }
        Ok(LatBaseline {
            n,
            prop,
            delivered: vec![Vec::new(); n],
            reach: HashSet::new(),
            top: None,
            nodes: 0,
            budget,
            truncated: false,
            possibly: false,
            definitely: TransitionCounter::default(),
            possibly_count: TransitionCounter::default(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn top(&self) -> Option<&Cut> {
        self.top.as_ref()
    }

    /// Rising edges of the Definitely verdict so far.
    pub fn definitely_detections(&self) -> u64 {
        self.definitely.count()
    }

    /// Rising edges of the Possibly verdict (at most one, since the lattice
    /// only grows).
    pub fn possibly_detections(&self) -> u64 {
        self.possibly_count.count()
    }

    fn satisfies(&self, cut: &[u32]) -> Result<bool> {
        for (k, name) in self.prop.locals.iter().enumerate() {
            match self.delivered[k][cut[k] as usize].payload.get(name) {
                Some(true) => {}
                Some(false) => return Ok(false),
                None => return Err(Error::UnknownPredicate(name.clone())),
            }
        }
        Ok(true)
    }

    /// Consistent cuts whose coordinate `k` is `i`, over the delivered
    /// prefixes of the other processes.
    fn slice(&self, k: usize, i: u32) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut chosen: Vec<&LocalState> = Vec::with_capacity(self.n);
        let mut cur = vec![0u32; self.n];
        cur[k] = i;
        self.slice_rec(0, k, &self.delivered[k][i as usize], &mut chosen, &mut cur, &mut out);
        out
    }

    fn slice_rec<'a>(
        &'a self,
        j: usize,
        k: usize,
        anchor: &'a LocalState,
        chosen: &mut Vec<&'a LocalState>,
        cur: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if j == self.n {
            out.push(cur.clone());
            return;
        }
        if j == k {
            self.slice_rec(j + 1, k, anchor, chosen, cur, out);
            return;
        }
        for s in &self.delivered[j] {
            let ok = std::iter::once(anchor)
                .chain(chosen.iter().copied())
                .all(|t| !state_happens_before(s, t) && !state_happens_before(t, s));
            if ok {
                cur[j] = s.index;
                chosen.push(s);
                self.slice_rec(j + 1, k, anchor, chosen, cur, out);
                chosen.pop();
            }
        }
    }

    /// Feeds the next in-order state of its process.
    pub fn advance(&mut self, s: LocalState) -> Result<BaselineStep> {
        let (k, i) = (s.process, s.index);
        if k >= self.n {
            return Err(Error::ProcessOutOfRange(k, self.n));
        }
        if self.delivered[k].len() as u32 != i {
            return Err(Error::TraceGap { process: k, expected: self.delivered[k].len() as u32, found: i });
        }
        self.delivered[k].push(s);
        if self.truncated || self.delivered.iter().any(Vec::is_empty) {
            return Ok(self.verdicts(0));
        }

        let mut slice = self.slice(k, i);
        slice.sort_by_key(|c| (c.iter().map(|&x| x as u64).sum::<u64>(), c.clone()));
        let added = slice.len();
        self.nodes += added;
        if self.nodes > self.budget {
            self.truncated = true;
            log::info!("baseline lattice passed its budget of {} nodes", self.budget);
            return Ok(self.verdicts(added));
        }
        for c in slice {
            let sat = self.satisfies(&c)?;
            self.possibly |= sat;
            let cut = Cut::new(c);
            self.top = Some(match self.top.take() {
                Some(t) => join(&t, &cut),
                None => cut.clone(),
            });
            if sat {
                continue;
            }
            let is_bottom = cut.indices().iter().all(|&x| x == 0);
            let reached =
                is_bottom || (0..self.n).any(|j| cut.get(j) > 0 && self.reach.contains(&cut.with(j, cut.get(j) - 1)));
            if reached {
                self.reach.insert(cut);
            }
        }
        Ok(self.verdicts(added))
    }

    fn verdicts(&mut self, added: usize) -> BaselineStep {
        let definitely = self.top.as_ref().is_some_and(|t| !self.reach.contains(t));
        if !self.truncated {
            self.definitely.observe(definitely);
            self.possibly_count.observe(self.possibly);
        }
        BaselineStep { added, definitely, possibly: self.possibly }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::{detect, Modality};
    use crate::engine::LatWin;
    use crate::oracle::{random_trace, FLAG};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_detection_on_the_unbounded_engine() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for round in 0..200 {
            let n = 2 + round % 3;
            let trace = random_trace(&mut rng, n, 18, 0.35);
            let prop = Property::uniform("p", Modality::Definitely, FLAG, n);
            let pos = prop.with_modality(Modality::Possibly);
            let mut base = LatBaseline::new(n, prop.clone(), usize::MAX).unwrap();
            let mut eng = LatWin::unbounded(n).unwrap();
            // Round-robin delivery keeps every process's prefix in order.
            let mut next = vec![0usize; n];
            let mut done = false;
            while !done {
                done = true;
                for (list, cursor) in trace.states.iter().zip(next.iter_mut()) {
                    if let Some(r) = list.get(*cursor) {
                        *cursor += 1;
                        done = false;
                        let step = base.advance(r.state.clone()).unwrap();
                        eng.advance(r.state.clone());
                        assert_eq!(base.node_count(), crate::lattice::CutLattice::node_count(&eng));
                        assert_eq!(base.top(), eng.c_max());
                        assert_eq!(step.definitely, detect(&prop, &eng).unwrap().holds, "round {round}");
                        assert_eq!(step.possibly, detect(&pos, &eng).unwrap().holds);
                    }
                }
            }
        }
    }

    #[test]
    fn budget_truncates() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let trace = random_trace(&mut rng, 2, 20, 0.0);
        let mut base = LatBaseline::new(2, Property::uniform("p", Modality::Definitely, FLAG, 2), 5).unwrap();
        for list in &trace.states {
            for r in list {
                base.advance(r.state.clone()).unwrap();
            }
        }
        assert!(base.truncated());
    }
}
