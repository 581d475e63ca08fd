//! Conjunctive global predicates under the Possibly and Definitely
//! modalities, evaluated on any [`CutLattice`].

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Cut, CutLattice};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Possibly,
    Definitely,
}

/// Conjunction of one local predicate per process.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Property {
    pub name: String,
    pub modality: Modality,
    /// `locals[k]` names a payload entry of process `k`.
    pub locals: Vec<String>,
}

impl Property {
    /// The same predicate on each of `n` processes.
    pub fn uniform(name: &str, modality: Modality, predicate: &str, n: usize) -> Self {
        Property { name: name.to_string(), modality, locals: vec![predicate.to_string(); n] }
    }

    pub fn with_modality(&self, modality: Modality) -> Self {
        Property { modality, ..self.clone() }
    }

    /// Every referenced predicate must appear in the run's payload schema.
    pub fn check_schema(&self, schema: &[String]) -> Result<()> {
        match self.locals.iter().find(|l| !schema.contains(l)) {
            Some(missing) => Err(Error::UnknownPredicate(missing.clone())),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionOutcome {
    pub holds: bool,
    /// A satisfying node, for Possibly.
    pub witness: Option<Cut>,
    /// For Definitely: satisfying nodes that block every path from `c_min`
    /// to `c_max` through unsatisfying ones.
    pub evidence: Vec<Cut>,
}

pub fn eval_cgs<L: CutLattice + ?Sized>(cut: &Cut, prop: &Property, lattice: &L) -> Result<bool> {
    if prop.locals.len() != cut.len() {
        return Err(Error::PropertyArity { expected: prop.locals.len(), found: cut.len() });
    }
    for (k, name) in prop.locals.iter().enumerate() {
        let s = lattice
            .local_state(k, cut.get(k))
            .ok_or_else(|| Error::Config(format!("state {k}:{} is not in the lattice", cut.get(k))))?;
        match s.payload.get(name) {
            Some(true) => {}
            Some(false) => return Ok(false),
            None => return Err(Error::UnknownPredicate(name.clone())),
        }
    }
    Ok(true)
}

pub fn detect<L: CutLattice + ?Sized>(prop: &Property, lattice: &L) -> Result<DetectionOutcome> {
    if prop.locals.len() != lattice.process_count() {
        return Err(Error::PropertyArity { expected: prop.locals.len(), found: lattice.process_count() });
    }
    if lattice.is_empty() {
        return Ok(DetectionOutcome::default());
    }
    match prop.modality {
        Modality::Possibly => {
            let mut witness: Option<&Cut> = None;
            for c in lattice.cuts() {
                if eval_cgs(c, prop, lattice)? && witness.is_none_or(|w| c < w) {
                    witness = Some(c);
                }
            }
            Ok(DetectionOutcome { holds: witness.is_some(), witness: witness.cloned(), evidence: Vec::new() })
        }
        Modality::Definitely => definitely(prop, lattice),
    }
}

/// Searches for a path from `c_min` to `c_max` made only of unsatisfying
/// nodes; the modality holds iff none exists.
fn definitely<L: CutLattice + ?Sized>(prop: &Property, lattice: &L) -> Result<DetectionOutcome> {
    let (Some(lo), Some(hi)) = (lattice.bottom(), lattice.top()) else {
        return Ok(DetectionOutcome::default());
    };
    let mut sat: HashMap<Cut, bool> = HashMap::new();
    let mut check = |c: &Cut| -> Result<bool> {
        if let Some(&v) = sat.get(c) {
            return Ok(v);
        }
        let v = eval_cgs(c, prop, lattice)?;
        sat.insert(c.clone(), v);
        Ok(v)
    };
    if check(lo)? {
        return Ok(DetectionOutcome { holds: true, witness: None, evidence: vec![lo.clone()] });
    }
    let mut seen: HashSet<Cut> = HashSet::from([lo.clone()]);
    let mut queue = VecDeque::from([lo.clone()]);
    let mut blockers = Vec::new();
    while let Some(c) = queue.pop_front() {
        if &c == hi {
            return Ok(DetectionOutcome::default());
        }
        for s in lattice.successors(&c) {
            if !seen.insert(s.clone()) {
                continue;
            }
            if check(&s)? {
                blockers.push(s);
            } else {
                queue.push_back(s);
            }
        }
    }
    blockers.sort();
    Ok(DetectionOutcome { holds: true, witness: None, evidence: blockers })
}

/// Counts false-to-true transitions of a verdict sampled once per step.
#[derive(Clone, Debug, Default)]
pub struct TransitionCounter {
    last: bool,
    count: u64,
}

impl TransitionCounter {
    /// Records a verdict; true when it starts a new detection.
    pub fn observe(&mut self, holds: bool) -> bool {
        let rising = holds && !self.last;
        self.last = holds;
        if rising {
            self.count += 1;
        }
        rising
    }

    pub fn count(&self) -> u64 {
        self.count
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::{LocalState, Payload, VectorClock};
    use crate::engine::LatWinView;

    fn window(process: usize, n: usize, flags: &[bool]) -> Vec<LocalState> {
        flags
            .iter()
            .enumerate()
            .map(|(i, &f)| {
                let mut c = vec![0; n];
                c[process] = i as u32 + 1;
                let payload: Payload = [("p".to_string(), f)].into_iter().collect();
                LocalState::new(process, i as u32, VectorClock::from_components(c), payload)
            })
            .collect()
    }

    fn cuts(v: &[[u32; 2]]) -> Vec<Cut> {
        v.iter().map(|c| Cut::new(c.to_vec())).collect()
    }

    fn prop(m: Modality) -> Property {
        Property::uniform("p", m, "p", 2)
    }

    #[test]
    fn single_satisfying_node() {
        let v = LatWinView::from_parts(vec![window(0, 2, &[true]), window(1, 2, &[true])], cuts(&[[0, 0]]));
        assert!(detect(&prop(Modality::Possibly), &v).unwrap().holds);
        assert!(detect(&prop(Modality::Definitely), &v).unwrap().holds);
    }

    #[test]
    fn diamond_with_one_satisfying_middle() {
        // Only (1,0) satisfies: p0 true at index 1, p1 true at index 0.
        let v = LatWinView::from_parts(
            vec![window(0, 2, &[false, true]), window(1, 2, &[true, false])],
            cuts(&[[0, 0], [0, 1], [1, 0], [1, 1]]),
        );
        let pos = detect(&prop(Modality::Possibly), &v).unwrap();
        assert!(pos.holds);
        assert_eq!(pos.witness, Some(Cut::new(vec![1, 0])));
        let def = detect(&prop(Modality::Definitely), &v).unwrap();
        assert!(!def.holds);
        assert!(def.witness.is_none());
    }

    #[test]
    fn empty_view_never_holds() {
        let v = LatWinView::from_parts(vec![window(0, 2, &[true]), window(1, 2, &[true])], vec![]);
        for m in [Modality::Possibly, Modality::Definitely] {
            assert!(!detect(&prop(m), &v).unwrap().holds);
        }
    }

    #[test]
    fn unknown_predicate_is_a_schema_error() {
        let v = LatWinView::from_parts(vec![window(0, 2, &[true]), window(1, 2, &[true])], cuts(&[[0, 0]]));
        let bad = Property::uniform("q", Modality::Possibly, "missing", 2);
        assert!(matches!(detect(&bad, &v), Err(Error::UnknownPredicate(_))));
        assert!(bad.check_schema(&["p".to_string()]).is_err());
        assert!(matches!(
            detect(&Property::uniform("q", Modality::Possibly, "p", 3), &v),
            Err(Error::PropertyArity { .. })
        ));
    }

    #[test]
    fn transitions_count_rising_edges() {
        let mut t = TransitionCounter::default();
        let seq = [false, true, true, false, true, false, false, true];
        let rising: Vec<bool> = seq.iter().map(|&v| t.observe(v)).collect();
        assert_eq!(t.count(), 3);
        assert_eq!(rising, vec![false, true, false, false, true, false, false, true]);
    }
}
