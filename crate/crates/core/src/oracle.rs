//! Randomized cross-checks of the incremental engine against brute force.
//!
//! A run feeds a small random trace to [`LatWin`] in a random arrival order
//! and, after every advance, compares the maintained lattice with the full
//! lattice filtered to the current windows. Two engines with different step
//! orders and seeding choices run side by side and must agree.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use std::collections::HashSet;

use rayon::prelude::*;

use crate::clock::{LocalState, Payload};
use crate::detect::{detect, eval_cgs, Modality, Property};
use crate::engine::{LatWin, LatWinView, StepOrder};
use crate::lattice::{build_full_lattice, is_convex_sublattice, join, meet, Cut, CutLattice, FullLattice};
use crate::trace::{Trace, TraceBuilder};

pub const FLAG: &str = "p";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub n: usize,
    pub w: usize,
    /// Upper bound on events per process.
    pub max_events: usize,
    /// Chance that an event is a send (when it is not a pending receive).
    pub send_prob: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { n: 3, w: 2, max_events: 25, send_prob: 0.3 }
    }
}

fn flag(rng: &mut impl Rng) -> Payload {
    [(FLAG.to_string(), rng.random_bool(0.5))].into_iter().collect()
}

/// A random run over `n` processes with between 1 and `max_events` events
/// per process. Payloads carry a random `p` flag.
pub fn random_trace(rng: &mut impl Rng, n: usize, max_events: usize, send_prob: f64) -> Trace {
    let mut b = TraceBuilder::new(n, vec![FLAG.to_string()]);
    let mut t = 0.0;
    let cap = max_events.max(1);
    let quota: Vec<usize> = (0..n).map(|_| rng.random_range(1..=cap)).collect();
    for k in 0..n {
        b.internal(k, t, flag(rng));
    }
    let mut pending: Vec<(usize, crate::trace::MessageToken)> = Vec::new();
    loop {
        let open: Vec<usize> = (0..n).filter(|&k| (b.next_index(k) as usize) < quota[k]).collect();
        if open.is_empty() {
            break;
        }
        t += 1.0;
        let k = open[rng.random_range(0..open.len())];
        let deliverable: Vec<usize> = (0..pending.len()).filter(|&i| pending[i].0 == k).collect();
        if !deliverable.is_empty() && rng.random_bool(0.5) {
            let (_, token) = pending.swap_remove(deliverable[rng.random_range(0..deliverable.len())]);
            b.receive(k, token, t, flag(rng));
        } else if n > 1 && rng.random_bool(send_prob) {
            let mut dest = rng.random_range(0..n - 1);
            if dest >= k {
                dest += 1;
            }
            let token = b.send(k, t, flag(rng));
            pending.push((dest, token));
        } else {
            b.internal(k, t, flag(rng));
        }
    }
    b.finish(t + 1.0)
}

/// Every state of the trace in a random order. Per-process order is not kept;
/// the engine's reassembly queue restores it.
pub fn random_arrivals(rng: &mut impl Rng, trace: &Trace) -> Vec<LocalState> {
    let mut out: Vec<LocalState> = trace
        .all_states()
        .map(|r| {
            let mut s = r.state.clone();
            s.seq = s.index as u64;
            s
        })
        .collect();
    out.shuffle(rng);
    out
}

/// The properties checked after every advance of a randomized run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// Node set and edges equal the full lattice filtered to the windows.
    Equivalence,
    /// Closure under meet and join, distributivity, convexity.
    LatticeLaws,
    /// Anchors are the unique extremal nodes and touch window bounds.
    Anchors,
    /// Node count within `w^n`; per-step work within `w^(n-1)`.
    SpaceBound,
    /// Both step orders (and both seeding choices) give the same snapshot.
    Commutativity,
    /// Definitely implies Possibly.
    DefinitelyImpliesPossibly,
    /// Definitely agrees with enumeration of every path from bottom to top.
    DefinitelyByChains,
}

impl Check {
    pub const ALL: [Check; 7] = [
        Check::Equivalence,
        Check::LatticeLaws,
        Check::Anchors,
        Check::SpaceBound,
        Check::Commutativity,
        Check::DefinitelyImpliesPossibly,
        Check::DefinitelyByChains,
    ];
}

/// Outcome counts of one check over a batch of runs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckTally {
    pub checked: u64,
    pub violations: u64,
    /// The first few violations, for reproduction.
    pub examples: Vec<OracleFailure>,
}

const KEPT_EXAMPLES: usize = 5;

/// Per-check tallies for a batch of runs with one `(n, w)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub n: usize,
    pub w: usize,
    pub runs: usize,
    pub advances: u64,
    pub max_nodes: usize,
    pub anchor_repairs: u64,
    pub checks: std::collections::BTreeMap<Check, CheckTally>,
}

impl OracleReport {
    fn record(&mut self, check: Check, failure: Option<OracleFailure>) {
        let t = self.checks.entry(check).or_default();
        t.checked += 1;
        if let Some(f) = failure {
            t.violations += 1;
            if t.examples.len() < KEPT_EXAMPLES {
                t.examples.push(f);
            }
        }
    }

    pub fn tally(&self, check: Check) -> CheckTally {
        self.checks.get(&check).cloned().unwrap_or_default()
    }

    pub fn violations(&self) -> u64 {
        self.checks.values().map(|t| t.violations).sum()
    }

    fn merge(&mut self, other: OracleReport) {
        self.runs += other.runs;
        self.advances += other.advances;
        self.max_nodes = self.max_nodes.max(other.max_nodes);
        self.anchor_repairs += other.anchor_repairs;
        for (k, t) in other.checks {
            let mine = self.checks.entry(k).or_default();
            mine.checked += t.checked;
            mine.violations += t.violations;
            for e in t.examples {
                if mine.examples.len() < KEPT_EXAMPLES {
                    mine.examples.push(e);
                }
            }
        }
    }
}

/// Failure of one check, with enough context to reproduce it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleFailure {
    pub seed: u64,
    pub n: usize,
    pub w: usize,
    pub step: usize,
    pub message: String,
}

impl std::fmt::Display for OracleFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "seed {} (n={}, w={}) step {}: {}", self.seed, self.n, self.w, self.step, self.message)
    }
}

/// Node set and edges of `engine` against `full` filtered to the windows.
pub fn compare_with_full(engine: &LatWin, full: &FullLattice) -> Result<(), String> {
    engine.validate()?;
    let want = full.in_box(&engine.window_ranges());
    let view = engine.view();
    let got: HashSet<Cut> = view.nodes.iter().cloned().collect();
    if got != want {
        let mut missing: Vec<_> = want.difference(&got).collect();
        let mut extra: Vec<_> = got.difference(&want).collect();
        missing.sort();
        extra.sort();
        return Err(format!("node set differs: missing {missing:?}, extra {extra:?}"));
    }
    let mut want_edges: Vec<(Cut, Cut)> = Vec::new();
    for c in &view.nodes {
        for s in full.successors(c) {
            if want.contains(&s) {
                want_edges.push((c.clone(), s));
            }
        }
    }
    want_edges.sort();
    if want_edges != view.edges {
        return Err("edge set differs from the filtered full lattice".into());
    }
    Ok(())
}

fn lattice_laws(view: &LatWinView, full: &FullLattice, rng: &mut impl Rng) -> Result<(), String> {
    if view.nodes.is_empty() {
        return Ok(());
    }
    if !is_convex_sublattice(view.nodes.iter(), full) {
        return Err("not a convex sublattice of the full lattice".into());
    }
    let m = view.nodes.len();
    let pairs: Vec<(usize, usize)> = if m <= 40 {
        (0..m).flat_map(|a| (a..m).map(move |b| (a, b))).collect()
    } else {
        (0..500).map(|_| (rng.random_range(0..m), rng.random_range(0..m))).collect()
    };
    for (a, b) in pairs {
        let (a, b) = (&view.nodes[a], &view.nodes[b]);
        if !view.contains(&meet(a, b)) || !view.contains(&join(a, b)) {
            return Err(format!("{a:?} and {b:?} have a meet or join outside the window lattice"));
        }
    }
    // Distributivity on sampled triples (exhaustive for small views).
    let triples: Vec<(usize, usize, usize)> = if m <= 12 {
        (0..m).flat_map(|a| (0..m).flat_map(move |b| (0..m).map(move |c| (a, b, c)))).collect()
    } else {
        (0..500).map(|_| (rng.random_range(0..m), rng.random_range(0..m), rng.random_range(0..m))).collect()
    };
    for (a, b, c) in triples {
        let (a, b, c) = (&view.nodes[a], &view.nodes[b], &view.nodes[c]);
        let lhs = meet(a, &join(b, c));
        let rhs = join(&meet(a, b), &meet(a, c));
        if lhs != rhs || !view.contains(&lhs) {
            return Err(format!("distributivity fails on {a:?}, {b:?}, {c:?}"));
        }
    }
    Ok(())
}

fn anchors(engine: &LatWin) -> Result<(), String> {
    if engine.is_empty() {
        return if engine.c_min().is_none() && engine.c_max().is_none() {
            Ok(())
        } else {
            Err("empty lattice keeps anchors".into())
        };
    }
    engine.view().validate()
}

fn space_bound(engine: &LatWin, n: usize, w: usize) -> Result<(), String> {
    let st = engine.stats();
    let cube = (w as u64).pow(n as u32);
    let face = (w as u64).pow(n as u32 - 1);
    if st.max_nodes as u64 > cube {
        return Err(format!("{} nodes exceed w^n = {cube}", st.max_nodes));
    }
    if st.max_grow_candidates as u64 > face || st.max_prune_removed as u64 > face {
        return Err(format!(
            "per-step work {} / {} exceeds w^(n-1) = {face}",
            st.max_grow_candidates, st.max_prune_removed
        ));
    }
    Ok(())
}

/// Definitely by brute force: walks every path from bottom to top.
pub fn definitely_by_chains<L: CutLattice>(prop: &Property, lattice: &L) -> crate::Result<bool> {
    let (Some(lo), Some(hi)) = (lattice.bottom().cloned(), lattice.top().cloned()) else {
        return Ok(false);
    };
    fn walk<L: CutLattice>(c: &Cut, hi: &Cut, prop: &Property, lat: &L, hit: bool) -> crate::Result<bool> {
        let hit = hit || eval_cgs(c, prop, lat)?;
        if c == hi {
            return Ok(hit);
        }
        let succs = lat.successors(c);
        if succs.is_empty() {
            return Ok(true);
        }
        for s in succs {
            if !walk(&s, hi, prop, lat, hit)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
    walk(&lo, &hi, prop, lattice, false)
}

const CHAIN_CHECK_MAX_NODES: usize = 200;

/// One randomized run; every check is tallied after every advance.
pub fn check_run(seed: u64, config: &OracleConfig) -> OracleReport {
    let mut report = OracleReport { n: config.n, w: config.w, runs: 1, ..OracleReport::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trace = random_trace(&mut rng, config.n, config.max_events, config.send_prob);
    let arrivals = random_arrivals(&mut rng, &trace);
    let fail = |step: usize, message: String| OracleFailure { seed, n: config.n, w: config.w, step, message };
    let setup = build_full_lattice(&trace)
        .and_then(|full| Ok((full, LatWin::new(config.n, config.w)?, LatWin::new(config.n, config.w)?)));
    let (full, mut a, mut b) = match setup {
        Ok(x) => x,
        Err(e) => {
            report.record(Check::Equivalence, Some(fail(0, e.to_string())));
            return report;
        }
    };
    b.set_order(StepOrder::PruneThenGrow);
    b.set_seed_from_last(true);
    let def = Property::uniform("p", Modality::Definitely, FLAG, config.n);
    let pos = def.with_modality(Modality::Possibly);

    let mut step = 0;
    for s in arrivals {
        let (ra, rb) = match (a.on_receive(s.clone()), b.on_receive(s)) {
            (Ok(x), Ok(y)) => (x, y),
            (Err(e), _) | (_, Err(e)) => {
                report.record(Check::Equivalence, Some(fail(step, e.to_string())));
                return report;
            }
        };
        for (x, y) in ra.into_iter().zip(rb) {
            step += 1;
            let ua = a.advance(x);
            let ub = b.advance(y);
            let diverged = ua.added != ub.added || ua.removed != ub.removed || {
                let (va, vb) = (a.view(), b.view());
                va.nodes != vb.nodes || va.edges != vb.edges || va.c_min != vb.c_min || va.c_max != vb.c_max
            };
            report.record(Check::Commutativity, diverged.then(|| fail(step, "step orders diverged".into())));
            report.record(Check::Equivalence, compare_with_full(&a, &full).err().map(|m| fail(step, m)));
            let view = a.view();
            report.record(Check::LatticeLaws, lattice_laws(&view, &full, &mut rng).err().map(|m| fail(step, m)));
            report.record(Check::Anchors, anchors(&a).err().map(|m| fail(step, m)));
            report.record(Check::SpaceBound, space_bound(&a, config.n, config.w).err().map(|m| fail(step, m)));

            let verdicts = detect(&def, &view).and_then(|d| Ok((d.holds, detect(&pos, &view)?.holds)));
            match verdicts {
                Ok((d, p)) => {
                    report.record(
                        Check::DefinitelyImpliesPossibly,
                        (d && !p).then(|| fail(step, "definitely without possibly".into())),
                    );
                    if view.nodes.len() <= CHAIN_CHECK_MAX_NODES {
                        let by_chains = definitely_by_chains(&def, &view);
                        report.record(
                            Check::DefinitelyByChains,
                            match by_chains {
                                Ok(c) if c == d => None,
                                Ok(c) => Some(fail(step, format!("definitely {d} but chains say {c}"))),
                                Err(e) => Some(fail(step, e.to_string())),
                            },
                        );
                    }
                }
                Err(e) => report.record(Check::DefinitelyImpliesPossibly, Some(fail(step, e.to_string()))),
            }
        }
    }
    let st = a.stats();
    report.advances = st.advances;
    report.max_nodes = st.max_nodes;
    report.anchor_repairs = st.anchor_repairs;
    report
}

/// `seeds` randomized runs for every `(n, w)` pair, in parallel. Reports come
/// back in `(n, w)` order.
pub fn run_suite(first_seed: u64, seeds: usize, ns: &[usize], ws: &[usize], max_events: usize) -> Vec<OracleReport> {
    let pairs: Vec<(usize, usize)> = ns.iter().flat_map(|&n| ws.iter().map(move |&w| (n, w))).collect();
    pairs
        .par_iter()
        .map(|&(n, w)| {
            let config = OracleConfig { n, w, max_events, ..OracleConfig::default() };
            (0..seeds as u64).into_par_iter().map(|i| check_run(first_seed.wrapping_add(i), &config)).reduce(
                || OracleReport { n, w, ..OracleReport::default() },
                |mut acc, r| {
                    acc.merge(r);
                    acc
                },
            )
        })
        .collect()
}
