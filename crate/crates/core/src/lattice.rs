//! Global states, the consistency test, the precede/lead-to relations and the
//! brute-force lattice of every consistent global state of a trace.
//!
//! A global state is named by its index vector ([`Cut`]): `cut[k]` is the
//! index of the local state of process `k`. Within one run indices name
//! states uniquely, so lattices store cuts and look states up on demand.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::clock::{state_happens_before, LocalState};
use crate::error::{Error, Result};
use crate::trace::Trace;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cut(Vec<u32>);

impl Cut {
    pub fn new(indices: Vec<u32>) -> Self {
        Cut(indices)
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, k: usize) -> u32 {
        self.0[k]
    }

    /// Copy with coordinate `k` replaced.
    pub fn with(&self, k: usize, index: u32) -> Cut {
        let mut v = self.0.clone();
        v[k] = index;
        Cut(v)
    }

    pub fn into_inner(self) -> Vec<u32> {
        self.0
    }
}

impl fmt::Debug for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{:?}", self.0)
    }
}

impl From<Vec<u32>> for Cut {
    fn from(v: Vec<u32>) -> Self {
        Cut(v)
    }
}

/// One local state per process, `states[k].process == k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalState {
    pub states: Vec<LocalState>,
}

impl GlobalState {
    pub fn new(states: Vec<LocalState>) -> Result<Self> {
        for (k, s) in states.iter().enumerate() {
            if s.process != k {
                return Err(Error::Config(format!("global state slot {k} holds a state of process {}", s.process)));
            }
        }
        Ok(GlobalState { states })
    }

    pub fn cut(&self) -> Cut {
        Cut(self.states.iter().map(|s| s.index).collect())
    }

    pub fn is_consistent(&self) -> bool {
        is_consistent(self.states.iter())
    }
}

/// Pairwise concurrency of the given states, one per process. O(n^2) clock
/// lookups.
pub fn is_consistent<'a>(states: impl IntoIterator<Item = &'a LocalState>) -> bool {
    let states: Vec<&LocalState> = states.into_iter().collect();
    for (i, a) in states.iter().enumerate() {
        for b in &states[i + 1..] {
            if state_happens_before(a, b) || state_happens_before(b, a) {
                return false;
            }
        }
    }
    true
}

/// `c1 ≺ c2`: `c2` advances exactly one coordinate of `c1` by one.
pub fn precede(c1: &Cut, c2: &Cut) -> bool {
    if c1.len() != c2.len() {
        return false;
    }
    let mut advanced = 0;
    for (a, b) in c1.0.iter().zip(&c2.0) {
        if *b == a + 1 {
            advanced += 1;
        } else if a != b {
            return false;
        }
    }
    advanced == 1
}

/// `a ⤳ b` (reflexive). Between consistent cuts this is componentwise `<=`.
pub fn leads_to(a: &Cut, b: &Cut) -> bool {
    a.len() == b.len() && a.0.iter().zip(&b.0).all(|(x, y)| x <= y)
}

pub fn meet(a: &Cut, b: &Cut) -> Cut {
    Cut(a.0.iter().zip(&b.0).map(|(x, y)| *x.min(y)).collect())
}

pub fn join(a: &Cut, b: &Cut) -> Cut {
    Cut(a.0.iter().zip(&b.0).map(|(x, y)| *x.max(y)).collect())
}

/// Read access shared by the windowed lattice, its snapshots and the full
/// lattice. Edges are always the `≺` relation restricted to the node set.
pub trait CutLattice {
    fn process_count(&self) -> usize;
    fn node_count(&self) -> usize;
    fn contains(&self, cut: &Cut) -> bool;
    fn bottom(&self) -> Option<&Cut>;
    fn top(&self) -> Option<&Cut>;
    fn cuts(&self) -> Box<dyn Iterator<Item = &Cut> + '_>;
    fn local_state(&self, process: usize, index: u32) -> Option<&LocalState>;

    fn successors(&self, cut: &Cut) -> Vec<Cut> {
        (0..cut.len()).map(|k| cut.with(k, cut.get(k) + 1)).filter(|c| self.contains(c)).collect()
    }

    fn predecessors(&self, cut: &Cut) -> Vec<Cut> {
        (0..cut.len())
            .filter(|&k| cut.get(k) > 0)
            .map(|k| cut.with(k, cut.get(k) - 1))
            .filter(|c| self.contains(c))
            .collect()
    }

    fn is_empty(&self) -> bool {
        self.node_count() == 0
    }
}

/// The lattice of all consistent global states of a trace.
#[derive(Clone, Debug)]
pub struct FullLattice {
    n: usize,
    nodes: Vec<Cut>,
    index: HashMap<Cut, usize>,
    states: Vec<Vec<LocalState>>,
}

impl FullLattice {
    pub fn nodes(&self) -> &[Cut] {
        &self.nodes
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> Vec<(Cut, Cut)> {
        let mut out = Vec::new();
        for c in &self.nodes {
            for s in self.successors(c) {
                out.push((c.clone(), s));
            }
        }
        out
    }

    /// Cuts whose coordinates all fall in `ranges[k] = (lo, hi)` inclusive.
    pub fn restricted_to(&self, ranges: &[Option<(u32, u32)>]) -> HashSet<Cut> {
        self.nodes
            .iter()
            .filter(|c| {
                ranges.iter().enumerate().all(|(k, r)| match r {
                    Some((lo, hi)) => (*lo..=*hi).contains(&c.get(k)),
                    None => false,
                })
            })
            .cloned()
            .collect()
    }

    /// Same result as [`restricted_to`](Self::restricted_to), found by
    /// probing every point of the box instead of scanning all nodes.
    pub fn in_box(&self, ranges: &[Option<(u32, u32)>]) -> HashSet<Cut> {
        let mut out = HashSet::new();
        let Some(bounds) = ranges.iter().copied().collect::<Option<Vec<(u32, u32)>>>() else {
            return out;
        };
        if bounds.is_empty() {
            return out;
        }
        let mut cur: Vec<u32> = bounds.iter().map(|b| b.0).collect();
        loop {
            let c = Cut(cur.clone());
            if self.index.contains_key(&c) {
                out.insert(c);
            }
            let mut j = cur.len();
            loop {
                if j == 0 {
                    return out;
                }
                j -= 1;
                if cur[j] < bounds[j].1 {
                    cur[j] += 1;
                    break;
                }
                cur[j] = bounds[j].0;
            }
        }
    }

    pub fn to_json(&self) -> LatticeJson {
        LatticeJson {
            nodes: self.nodes.iter().map(|c| c.indices().to_vec()).collect(),
            edges: self.edges().into_iter().map(|(a, b)| [a.into_inner(), b.into_inner()]).collect(),
        }
    }
}

impl CutLattice for FullLattice {
    fn process_count(&self) -> usize {
        self.n
    }

    fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn contains(&self, cut: &Cut) -> bool {
        self.index.contains_key(cut)
    }

    fn bottom(&self) -> Option<&Cut> {
        self.nodes.first()
    }

    fn top(&self) -> Option<&Cut> {
        self.nodes.last()
    }

    fn cuts(&self) -> Box<dyn Iterator<Item = &Cut> + '_> {
        Box::new(self.nodes.iter())
    }

    fn local_state(&self, process: usize, index: u32) -> Option<&LocalState> {
        self.states.get(process)?.get(index as usize)
    }
}

/// Node/edge export for golden files and plotting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeJson {
    pub nodes: Vec<Vec<u32>>,
    pub edges: Vec<[Vec<u32>; 2]>,
}

fn trace_states(trace: &Trace) -> Result<Vec<Vec<LocalState>>> {
    trace.check_gapless()?;
    Ok(trace.states.iter().map(|l| l.iter().map(|r| r.state.clone()).collect()).collect())
}

fn cut_consistent(states: &[Vec<LocalState>], cut: &Cut) -> bool {
    is_consistent(cut.indices().iter().enumerate().map(|(k, &i)| &states[k][i as usize]))
}

pub fn build_full_lattice(trace: &Trace) -> Result<FullLattice> {
    build_full_lattice_bounded(trace, usize::MAX)
}

/// Breadth-first closure from the initial global state under `≺`. Fails with
/// [`Error::BudgetExceeded`] once more than `budget` nodes are found.
pub fn build_full_lattice_bounded(trace: &Trace, budget: usize) -> Result<FullLattice> {
    let states = trace_states(trace)?;
    let n = trace.n;
    let mut index = HashMap::new();
    let mut nodes = Vec::new();
    if n > 0 && states.iter().all(|l| !l.is_empty()) {
        let start = Cut(vec![0; n]);
        // The initial states are always pairwise concurrent.
        debug_assert!(cut_consistent(&states, &start));
        let mut queue = VecDeque::from([start.clone()]);
        index.insert(start, usize::MAX);
        while let Some(c) = queue.pop_front() {
            nodes.push(c.clone());
            if nodes.len() > budget {
                return Err(Error::BudgetExceeded(budget));
            }
            for k in 0..n {
                let next = c.get(k) + 1;
                if next as usize >= states[k].len() {
                    continue;
                }
                let s = c.with(k, next);
                if index.contains_key(&s) || !cut_consistent(&states, &s) {
                    continue;
                }
                index.insert(s.clone(), usize::MAX);
                queue.push_back(s);
            }
        }
    }
    nodes.sort();
    for (i, c) in nodes.iter().enumerate() {
        index.insert(c.clone(), i);
    }
    Ok(FullLattice { n, nodes, index, states })
}

/// Visits every consistent cut by depth-first search over the Cartesian
/// product, pruning a prefix as soon as it is inconsistent.
fn for_each_consistent_product(states: &[Vec<LocalState>], mut visit: impl FnMut(&[u32]) -> bool) {
    fn rec(states: &[Vec<LocalState>], prefix: &mut Vec<u32>, visit: &mut dyn FnMut(&[u32]) -> bool) -> bool {
        let k = prefix.len();
        if k == states.len() {
            return visit(prefix);
        }
        for (i, cand) in states[k].iter().enumerate() {
            let ok = prefix.iter().enumerate().all(|(j, &pi)| {
                let other = &states[j][pi as usize];
                !state_happens_before(other, cand) && !state_happens_before(cand, other)
            });
            if ok {
                prefix.push(i as u32);
                let go_on = rec(states, prefix, visit);
                prefix.pop();
                if !go_on {
                    return false;
                }
            }
        }
        true
    }
    if states.is_empty() {
        return;
    }
    let mut prefix = Vec::with_capacity(states.len());
    rec(states, &mut prefix, &mut visit);
}

/// Every consistent combination of one state per process, found by product
/// enumeration rather than closure. Independent second route to the node set.
pub fn consistent_cuts_by_product(trace: &Trace) -> Result<Vec<Cut>> {
    let states = trace_states(trace)?;
    let mut out = Vec::new();
    for_each_consistent_product(&states, |c| {
        out.push(Cut(c.to_vec()));
        true
    });
    out.sort();
    Ok(out)
}

/// Size of the full lattice without materializing it. Returns
/// `Err(BudgetExceeded)` once the count passes `budget`.
pub fn count_full_lattice(trace: &Trace, budget: usize) -> Result<usize> {
    let states = trace_states(trace)?;
    let mut count = 0usize;
    let mut over = false;
    for_each_consistent_product(&states, |_| {
        count += 1;
        if count > budget {
            over = true;
            return false;
        }
        true
    });
    if over {
        Err(Error::BudgetExceeded(budget))
    } else {
        Ok(count)
    }
}

/// Whether `sub` is closed under meet and join and convex inside `full`.
pub fn is_convex_sublattice<'a, L: CutLattice + ?Sized>(sub: impl IntoIterator<Item = &'a Cut>, full: &L) -> bool {
    let sub: HashSet<&Cut> = sub.into_iter().collect();
    if sub.iter().any(|c| !full.contains(c)) {
        return false;
    }
    let items: Vec<&Cut> = sub.iter().copied().collect();
    for (i, a) in items.iter().enumerate() {
        for b in &items[i..] {
            if !sub.contains(&meet(a, b)) || !sub.contains(&join(a, b)) {
                return false;
            }
        }
    }
    let Some(first) = items.first() else {
        return true;
    };
    // Closed, so the whole set lies in [lo, hi] and convexity reduces to
    // every full-lattice node of that interval being present.
    let lo = items.iter().fold((*first).clone(), |acc, c| meet(&acc, c));
    let hi = items.iter().fold((*first).clone(), |acc, c| join(&acc, c));
    let volume =
        lo.indices().iter().zip(hi.indices()).try_fold(1usize, |v, (a, b)| v.checked_mul((b - a + 1) as usize));
    match volume {
        Some(v) if v <= full.node_count() => {
            interval_points(&lo, &hi).into_iter().all(|c| !full.contains(&c) || sub.contains(&c))
        }
        _ => full.cuts().filter(|c| leads_to(&lo, c) && leads_to(c, &hi)).all(|c| sub.contains(c)),
    }
}

/// Every index vector `c` with `lo ⤳ c ⤳ hi`.
fn interval_points(lo: &Cut, hi: &Cut) -> Vec<Cut> {
    let mut out = Vec::new();
    let mut cur = lo.0.clone();
    loop {
        out.push(Cut(cur.clone()));
        let mut j = cur.len();
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            if cur[j] < hi.0[j] {
                cur[j] += 1;
                break;
            }
            cur[j] = lo.0[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::Payload;
    use crate::trace::TraceBuilder;

    fn c(v: &[u32]) -> Cut {
        Cut(v.to_vec())
    }

    #[test]
    fn precede_examples() {
        assert!(precede(&c(&[2, 3]), &c(&[3, 3])));
        assert!(!precede(&c(&[2, 3]), &c(&[3, 4])));
        assert!(!precede(&c(&[2, 3]), &c(&[2, 3])));
        assert!(!precede(&c(&[3, 3]), &c(&[2, 3])));
    }

    #[test]
    fn meet_join_examples() {
        assert_eq!(meet(&c(&[2, 4]), &c(&[3, 3])), c(&[2, 3]));
        assert_eq!(join(&c(&[2, 4]), &c(&[3, 3])), c(&[3, 4]));
        assert_eq!(meet(&c(&[2, 4]), &c(&[2, 4])), c(&[2, 4]));
    }

    #[test]
    fn single_process_is_always_consistent() {
        let mut b = TraceBuilder::new(1, vec![]);
        b.internal(0, 0.0, Payload::new());
        let t = b.finish(1.0);
        assert!(is_consistent([t.local_state(0, 0).unwrap()]));
    }

    #[test]
    fn no_messages_gives_full_product() {
        let (n, p) = (3usize, 4usize);
        let mut b = TraceBuilder::new(n, vec![]);
        for k in 0..n {
            for i in 0..p {
                b.internal(k, i as f64, Payload::new());
            }
        }
        let t = b.finish(10.0);
        let lat = build_full_lattice(&t).unwrap();
        assert_eq!(lat.size(), p.pow(n as u32));
        assert_eq!(count_full_lattice(&t, usize::MAX).unwrap(), lat.size());
        assert!(matches!(count_full_lattice(&t, 10), Err(Error::BudgetExceeded(10))));
        assert!(matches!(build_full_lattice_bounded(&t, 10), Err(Error::BudgetExceeded(10))));
        assert_eq!(lat.bottom(), Some(&c(&[0, 0, 0])));
        assert_eq!(lat.top(), Some(&c(&[3, 3, 3])));
    }

    #[test]
    fn singleton_is_convex() {
        let mut b = TraceBuilder::new(2, vec![]);
        for k in 0..2 {
            b.internal(k, 0.0, Payload::new());
            b.internal(k, 1.0, Payload::new());
        }
        let lat = build_full_lattice(&b.finish(2.0)).unwrap();
        assert!(is_convex_sublattice([&c(&[1, 0])], &lat));
        assert!(is_convex_sublattice(std::iter::empty(), &lat));
        // Missing the interior of [0,0]..[1,1].
        assert!(!is_convex_sublattice([&c(&[0, 0]), &c(&[1, 1]), &c(&[0, 1])], &lat));
        assert!(is_convex_sublattice(lat.nodes(), &lat));
    }

    #[test]
    fn json_export_lists_edges() {
        let mut b = TraceBuilder::new(2, vec![]);
        for k in 0..2 {
            b.internal(k, 0.0, Payload::new());
        }
        b.internal(0, 1.0, Payload::new());
        let lat = build_full_lattice(&b.finish(2.0)).unwrap();
        let j = lat.to_json();
        assert_eq!(j.nodes, vec![vec![0, 0], vec![1, 0]]);
        assert_eq!(j.edges, vec![[vec![0, 0], vec![1, 0]]]);
    }
}
