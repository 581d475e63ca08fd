//! Online maintenance of the windowed lattice of consistent global states.
//!
//! Each delivered local state is appended to its process window (evicting the
//! oldest state once the window is full), then the lattice grows from its
//! maximal anchor and prunes from its minimal anchor. Neither step scans the
//! whole lattice: growth only tests global states containing the new state,
//! and pruning only visits nodes containing the evicted one.

mod reorder;
mod window;

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

pub use reorder::ReorderQueue;
pub use window::WindowBuffer;

use crate::clock::LocalState;
use crate::error::{Error, Result};
use crate::lattice::{is_consistent, precede, Cut, CutLattice};

type NodeId = usize;

#[derive(Clone, Debug)]
struct Node {
    cut: Cut,
    preds: Vec<NodeId>,
    succs: Vec<NodeId>,
}

/// Order in which the two halves of an update run. Growth and pruning touch
/// disjoint node sets, so both orders reach the same lattice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepOrder {
    #[default]
    GrowThenPrune,
    PruneThenGrow,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineStats {
    pub advances: u64,
    pub node_count: usize,
    pub max_nodes: usize,
    /// Sum of node counts after each advance.
    pub node_count_sum: u64,
    pub max_grow_candidates: usize,
    pub max_prune_removed: usize,
    pub duplicates: u64,
    /// Times the minimal anchor had to be recovered by a scan after pruning.
    pub anchor_repairs: u64,
}

impl EngineStats {
    pub fn mean_nodes(&self) -> f64 {
        if self.advances == 0 {
            0.0
        } else {
            self.node_count_sum as f64 / self.advances as f64
        }
    }
}

/// Outcome of one [`LatWin::advance`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateReport {
    pub process: usize,
    pub index: u32,
    pub added: Vec<Cut>,
    pub removed: Vec<Cut>,
    pub c_min: Option<Cut>,
    pub c_max: Option<Cut>,
    pub node_count: usize,
    /// Distinct global states tested for consistency while growing.
    pub grow_candidates: usize,
}

/// The windowed lattice together with the per-process reassembly queues.
#[derive(Clone, Debug)]
pub struct LatWin {
    n: usize,
    windows: Vec<WindowBuffer>,
    queues: Vec<ReorderQueue>,
    slots: Vec<Option<Node>>,
    free: Vec<NodeId>,
    index: HashMap<Cut, NodeId>,
    c_min: Option<NodeId>,
    c_max: Option<NodeId>,
    order: StepOrder,
    seed_from_last: bool,
    stats: EngineStats,
}

impl LatWin {
    /// `n` processes, uniform window size `w`.
    pub fn new(n: usize, w: usize) -> Result<Self> {
        Self::with_capacities(vec![w; n])
    }

    /// One window capacity per process.
    pub fn with_capacities(capacities: Vec<usize>) -> Result<Self> {
        if capacities.is_empty() {
            return Err(Error::Config("at least one process is required".into()));
        }
        if capacities.contains(&0) {
            return Err(Error::Config("window size must be positive".into()));
        }
        let n = capacities.len();
        Ok(LatWin {
            n,
            windows: capacities.into_iter().map(WindowBuffer::new).collect(),
            queues: vec![ReorderQueue::new(); n],
            slots: Vec::new(),
            free: Vec::new(),
            index: HashMap::new(),
            c_min: None,
            c_max: None,
            order: StepOrder::default(),
            seed_from_last: false,
            stats: EngineStats::default(),
        })
    }

    /// Windows that never evict: the engine then maintains the lattice of
    /// every delivered state.
    pub fn unbounded(n: usize) -> Result<Self> {
        Self::with_capacities(vec![usize::MAX; n])
    }

    pub fn set_order(&mut self, order: StepOrder) {
        self.order = order;
    }

    /// Seeds growth of an empty lattice from the last qualifying candidate
    /// instead of the first. The resulting lattice must not depend on it.
    pub fn set_seed_from_last(&mut self, yes: bool) {
        self.seed_from_last = yes;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn windows(&self) -> &[WindowBuffer] {
        &self.windows
    }

    pub fn stats(&self) -> &EngineStats {
        &self.stats
    }

    pub fn c_min(&self) -> Option<&Cut> {
        self.c_min.map(|id| self.cut(id))
    }

    pub fn c_max(&self) -> Option<&Cut> {
        self.c_max.map(|id| self.cut(id))
    }

    /// Inclusive index range of every window, `None` for empty windows.
    pub fn window_ranges(&self) -> Vec<Option<(u32, u32)>> {
        self.windows.iter().map(WindowBuffer::range).collect()
    }

    /// Buffers an arrival and returns the states now deliverable in order.
    pub fn on_receive(&mut self, s: LocalState) -> Result<Vec<LocalState>> {
        s.validate(self.n)?;
        let q = &mut self.queues[s.process];
        let before = q.duplicates();
        let out = q.on_receive(s);
        self.stats.duplicates += q.duplicates() - before;
        Ok(out)
    }

    /// [`on_receive`](Self::on_receive) followed by an advance per delivered
    /// state.
    pub fn receive(&mut self, s: LocalState) -> Result<Vec<UpdateReport>> {
        Ok(self.on_receive(s)?.into_iter().map(|s| self.advance(s)).collect())
    }

    /// Slides the window of `s.process` and updates the lattice. `s` must be
    /// the next state of its process.
    pub fn advance(&mut self, s: LocalState) -> UpdateReport {
        let k = s.process;
        let index = s.index;
        let evicted = self.windows[k].push(s).map(|old| old.index);
        let mut memo = HashMap::new();
        let (added, removed) = match self.order {
            StepOrder::GrowThenPrune => {
                let added = self.grow_lattice(k, index, &mut memo);
                let removed = evicted.map(|t| self.prune_lattice(k, t)).unwrap_or_default();
                (added, removed)
            }
            StepOrder::PruneThenGrow => {
                let removed = evicted.map(|t| self.prune_lattice(k, t)).unwrap_or_default();
                let added = self.grow_lattice(k, index, &mut memo);
                (added, removed)
            }
        };
        let node_count = self.index.len();
        let st = &mut self.stats;
        st.advances += 1;
        st.node_count = node_count;
        st.max_nodes = st.max_nodes.max(node_count);
        st.node_count_sum += node_count as u64;
        st.max_grow_candidates = st.max_grow_candidates.max(memo.len());
        st.max_prune_removed = st.max_prune_removed.max(removed.len());
        UpdateReport {
            process: k,
            index,
            added,
            removed,
            c_min: self.c_min().cloned(),
            c_max: self.c_max().cloned(),
            node_count,
            grow_candidates: memo.len(),
        }
    }

    fn cut(&self, id: NodeId) -> &Cut {
        &self.node(id).cut
    }

    fn node(&self, id: NodeId) -> &Node {
        self.slots[id].as_ref().expect("live node id")
    }

    fn node_mut(&mut self, id: NodeId) -> &mut Node {
        self.slots[id].as_mut().expect("live node id")
    }

    fn insert(&mut self, cut: Cut) -> NodeId {
        let node = Node { cut: cut.clone(), preds: Vec::new(), succs: Vec::new() };
        let id = match self.free.pop() {
            Some(id) => {
                self.slots[id] = Some(node);
                id
            }
            None => {
                self.slots.push(Some(node));
                self.slots.len() - 1
            }
        };
        self.index.insert(cut, id);
        id
    }

    fn connect(&mut self, from: NodeId, to: NodeId) {
        if !self.node(from).succs.contains(&to) {
            self.node_mut(from).succs.push(to);
            self.node_mut(to).preds.push(from);
        }
    }

    fn disconnect(&mut self, from: NodeId, to: NodeId) {
        self.node_mut(from).succs.retain(|&x| x != to);
        self.node_mut(to).preds.retain(|&x| x != from);
    }

    fn delete(&mut self, id: NodeId) -> Cut {
        let node = self.slots[id].take().expect("live node id");
        for &p in &node.preds {
            self.node_mut(p).succs.retain(|&x| x != id);
        }
        for &s in &node.succs {
            self.node_mut(s).preds.retain(|&x| x != id);
        }
        self.index.remove(&node.cut);
        self.free.push(id);
        node.cut
    }

    fn clear_lattice(&mut self) -> Vec<Cut> {
        let mut removed: Vec<Cut> = self.index.drain().map(|(c, _)| c).collect();
        removed.sort();
        self.slots.clear();
        self.free.clear();
        self.c_min = None;
        self.c_max = None;
        removed
    }

    fn in_window(&self, cut: &Cut) -> bool {
        self.windows.iter().enumerate().all(|(k, w)| w.contains_index(cut.get(k)))
    }

    /// Consistency of an in-window global state, memoized per advance.
    fn test(&self, cut: &Cut, memo: &mut HashMap<Cut, bool>) -> bool {
        if let Some(&v) = memo.get(cut) {
            return v;
        }
        let ok = is_consistent(
            cut.indices().iter().enumerate().map(|(k, &i)| self.windows[k].get(i).expect("cut inside window")),
        );
        memo.insert(cut.clone(), ok);
        ok
    }

    /// Seed for growing an empty lattice: a consistent global state holding
    /// the new state with some other coordinate on its window's lower bound.
    fn boundary_seed(&self, k: usize, index: u32, memo: &mut HashMap<Cut, bool>) -> Option<Cut> {
        let mut ranges = Vec::with_capacity(self.n);
        for (j, w) in self.windows.iter().enumerate() {
            if j == k {
                ranges.push((index, index));
            } else {
                ranges.push(w.range()?);
            }
        }
        if self.n == 1 {
            let c = Cut::new(vec![index]);
            return self.test(&c, memo).then_some(c);
        }
        let mut found = None;
        let mut cur: Vec<u32> = ranges.iter().map(|r| r.0).collect();
        loop {
            let on_bound = (0..self.n).any(|j| j != k && cur[j] == ranges[j].0);
            if on_bound {
                let c = Cut::new(cur.clone());
                if self.test(&c, memo) {
                    found = Some(c);
                    if !self.seed_from_last {
                        return found;
                    }
                }
            }
            // Odometer step over the product of ranges.
            let mut j = self.n;
            loop {
                if j == 0 {
                    return found;
                }
                j -= 1;
                if cur[j] < ranges[j].1 {
                    cur[j] += 1;
                    break;
                }
                cur[j] = ranges[j].0;
            }
        }
    }

    /// Adds every consistent in-window global state containing the newly
    /// delivered state `index` of process `k`.
    fn grow_lattice(&mut self, k: usize, index: u32, memo: &mut HashMap<Cut, bool>) -> Vec<Cut> {
        let was_empty = self.index.is_empty();
        let seed = if was_empty {
            self.boundary_seed(k, index, memo)
        } else {
            let max = self.c_max().expect("nonempty lattice has a maximum").clone();
            if max.get(k) + 1 == index {
                let g = max.with(k, index);
                self.test(&g, memo).then_some(g)
            } else {
                None
            }
        };
        let Some(seed) = seed else {
            return Vec::new();
        };

        let first = self.insert(seed);
        let mut added = vec![first];
        let mut stack = vec![first];
        while let Some(id) = stack.pop() {
            let cut = self.cut(id).clone();
            for j in 0..self.n {
                if cut.get(j) > 0 {
                    let p = cut.with(j, cut.get(j) - 1);
                    if let Some(&pid) = self.index.get(&p) {
                        self.connect(pid, id);
                    } else if j != k && self.in_window(&p) && self.test(&p, memo) {
                        // Coordinate k stays on the new state, so this is new.
                        let pid = self.insert(p);
                        self.connect(pid, id);
                        added.push(pid);
                        stack.push(pid);
                    }
                }
                let q = cut.with(j, cut.get(j) + 1);
                if let Some(&qid) = self.index.get(&q) {
                    self.connect(id, qid);
                } else if j != k && self.in_window(&q) && self.test(&q, memo) {
                    let qid = self.insert(q);
                    self.connect(id, qid);
                    added.push(qid);
                    stack.push(qid);
                }
            }
        }

        if let Some(&top) = added.iter().find(|&&id| self.node(id).succs.is_empty()) {
            self.c_max = Some(top);
        }
        if was_empty {
            self.c_min = added.iter().copied().find(|&id| self.node(id).preds.is_empty());
        }
        let mut out: Vec<Cut> = added.into_iter().map(|id| self.cut(id).clone()).collect();
        out.sort();
        out
    }

    /// Removes every node whose coordinate `k` is the evicted state `stale`.
    fn prune_lattice(&mut self, k: usize, stale: u32) -> Vec<Cut> {
        let (Some(min), Some(max)) = (self.c_min, self.c_max) else {
            return Vec::new();
        };
        if self.cut(min).get(k) != stale {
            return Vec::new();
        }
        if self.cut(max).get(k) == stale {
            return self.clear_lattice();
        }

        let mut new_min = None;
        let mut seen = HashSet::from([min]);
        let mut stack = vec![min];
        let mut removed = Vec::new();
        while let Some(id) = stack.pop() {
            for succ in self.node(id).succs.clone() {
                self.disconnect(id, succ);
                let sk = self.cut(succ).get(k);
                if sk == stale {
                    if seen.insert(succ) {
                        stack.push(succ);
                    }
                } else if sk == stale + 1 && self.node(succ).preds.is_empty() {
                    new_min = Some(succ);
                }
            }
            removed.push(self.delete(id));
        }

        self.c_min = new_min;
        if self.c_min.is_none() && !self.index.is_empty() {
            self.stats.anchor_repairs += 1;
            log::warn!("minimal anchor lost while pruning; recovering by scan");
            self.c_min = self.index.values().copied().find(|&id| self.node(id).preds.is_empty());
        }
        removed.sort();
        removed
    }

    pub fn view(&self) -> LatWinView {
        let mut nodes: Vec<Cut> = self.index.keys().cloned().collect();
        nodes.sort();
        let mut edges: Vec<(Cut, Cut)> = self
            .index
            .values()
            .flat_map(|&id| {
                let from = self.cut(id);
                self.node(id).succs.iter().map(move |&s| (from.clone(), self.cut(s).clone()))
            })
            .collect();
        edges.sort();
        LatWinView {
            n: self.n,
            windows: self.windows.iter().map(|w| w.iter().cloned().collect()).collect(),
            index: nodes.iter().cloned().collect(),
            nodes,
            edges,
            c_min: self.c_min().cloned(),
            c_max: self.c_max().cloned(),
        }
    }

    /// Checks the structural invariants: nodes inside the windows, adjacency
    /// equal to `≺` on the node set, anchors unique extremal and touching a
    /// window bound.
    pub fn validate(&self) -> std::result::Result<(), String> {
        for (cut, &id) in &self.index {
            if !self.in_window(cut) {
                return Err(format!("{cut:?} lies outside the window"));
            }
            let node = self.node(id);
            let mut preds: Vec<&Cut> = node.preds.iter().map(|&p| self.cut(p)).collect();
            let mut succs: Vec<&Cut> = node.succs.iter().map(|&s| self.cut(s)).collect();
            preds.sort();
            succs.sort();
            let mut want_preds = self.predecessors(cut);
            let mut want_succs = self.successors(cut);
            want_preds.sort();
            want_succs.sort();
            if preds != want_preds.iter().collect::<Vec<_>>() || succs != want_succs.iter().collect::<Vec<_>>() {
                return Err(format!("adjacency of {cut:?} differs from the precede relation"));
            }
            if preds.iter().any(|p| !precede(p, cut)) {
                return Err(format!("bad edge into {cut:?}"));
            }
        }
        check_anchors(self, &self.window_ranges())
    }
}

fn check_anchors<L: CutLattice>(lat: &L, ranges: &[Option<(u32, u32)>]) -> std::result::Result<(), String> {
    if lat.is_empty() {
        if lat.bottom().is_some() || lat.top().is_some() {
            return Err("empty lattice with anchors".into());
        }
        return Ok(());
    }
    let (Some(lo), Some(hi)) = (lat.bottom(), lat.top()) else {
        return Err("nonempty lattice without anchors".into());
    };
    let minimal: Vec<&Cut> = lat.cuts().filter(|c| lat.predecessors(c).is_empty()).collect();
    let maximal: Vec<&Cut> = lat.cuts().filter(|c| lat.successors(c).is_empty()).collect();
    if minimal != [lo] {
        return Err(format!("c_min {lo:?} is not the unique minimal node ({minimal:?})"));
    }
    if maximal != [hi] {
        return Err(format!("c_max {hi:?} is not the unique maximal node ({maximal:?})"));
    }
    let touches = |c: &Cut, upper: bool| {
        ranges.iter().enumerate().any(|(k, r)| r.is_some_and(|(a, b)| c.get(k) == if upper { b } else { a }))
    };
    if !touches(hi, true) {
        return Err(format!("c_max {hi:?} touches no window upper bound"));
    }
    if !touches(lo, false) {
        return Err(format!("c_min {lo:?} touches no window lower bound"));
    }
    Ok(())
}

impl CutLattice for LatWin {
    fn process_count(&self) -> usize {
        self.n
    }

    fn node_count(&self) -> usize {
        self.index.len()
    }

    fn contains(&self, cut: &Cut) -> bool {
        self.index.contains_key(cut)
    }

    fn bottom(&self) -> Option<&Cut> {
        self.c_min()
    }

    fn top(&self) -> Option<&Cut> {
        self.c_max()
    }

    fn cuts(&self) -> Box<dyn Iterator<Item = &Cut> + '_> {
        Box::new(self.index.keys())
    }

    fn local_state(&self, process: usize, index: u32) -> Option<&LocalState> {
        self.windows.get(process)?.get(index)
    }
}

/// Immutable point-in-time copy of the windowed lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatWinView {
    pub n: usize,
    pub windows: Vec<Vec<LocalState>>,
    pub nodes: Vec<Cut>,
    pub edges: Vec<(Cut, Cut)>,
    pub c_min: Option<Cut>,
    pub c_max: Option<Cut>,
    #[serde(skip)]
    index: HashSet<Cut>,
}

impl LatWinView {
    /// Builds a view from parts, e.g. for detection over hand-made lattices.
    /// Edges are derived from `≺`.
    pub fn from_parts(windows: Vec<Vec<LocalState>>, mut nodes: Vec<Cut>) -> Self {
        nodes.sort();
        nodes.dedup();
        let index: HashSet<Cut> = nodes.iter().cloned().collect();
        let mut edges = Vec::new();
        for c in &nodes {
            for k in 0..c.len() {
                let s = c.with(k, c.get(k) + 1);
                if index.contains(&s) {
                    edges.push((c.clone(), s));
                }
            }
        }
        let minimal: Vec<&Cut> = nodes
            .iter()
            .filter(|c| (0..c.len()).all(|k| c.get(k) == 0 || !index.contains(&c.with(k, c.get(k) - 1))))
            .collect();
        let maximal: Vec<&Cut> =
            nodes.iter().filter(|c| (0..c.len()).all(|k| !index.contains(&c.with(k, c.get(k) + 1)))).collect();
        let c_min = (minimal.len() == 1).then(|| minimal[0].clone());
        let c_max = (maximal.len() == 1).then(|| maximal[0].clone());
        LatWinView { n: windows.len(), windows, nodes, edges, c_min, c_max, index }
    }

    pub fn window_ranges(&self) -> Vec<Option<(u32, u32)>> {
        self.windows.iter().map(|w| Some((w.first()?.index, w.last()?.index))).collect()
    }

    /// Same invariants as [`LatWin::validate`], checked on the copy.
    pub fn validate(&self) -> std::result::Result<(), String> {
        for (a, b) in &self.edges {
            if !precede(a, b) || !self.index.contains(a) || !self.index.contains(b) {
                return Err(format!("bad edge {a:?} -> {b:?}"));
            }
        }
        let derived: usize = self.nodes.iter().map(|c| self.successors(c).len()).sum();
        if derived != self.edges.len() {
            return Err("edge set differs from the precede relation".into());
        }
        check_anchors(self, &self.window_ranges())
    }
}

impl CutLattice for LatWinView {
    fn process_count(&self) -> usize {
        self.n
    }

    fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn contains(&self, cut: &Cut) -> bool {
        self.index.contains(cut)
    }

    fn bottom(&self) -> Option<&Cut> {
        self.c_min.as_ref()
    }

    fn top(&self) -> Option<&Cut> {
        self.c_max.as_ref()
    }

    fn cuts(&self) -> Box<dyn Iterator<Item = &Cut> + '_> {
        Box::new(self.nodes.iter())
    }

    fn local_state(&self, process: usize, index: u32) -> Option<&LocalState> {
        let w = self.windows.get(process)?;
        let lo = w.first()?.index;
        w.get(index.checked_sub(lo)? as usize)
    }
}
