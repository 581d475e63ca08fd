//! Happen-before from vector clocks against explicit reachability in the
//! event graph, plus algebraic laws of `merge`.

use std::collections::HashMap;

use latwin::oracle::random_trace;
use latwin::{concurrent, event_happens_before, merge, state_happens_before, EventId, LocalState, Trace, VectorClock};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `reach[a][b]`: event `b` is reachable from event `a` along program order
/// and message edges (strictly, so `a` never reaches itself).
fn reachability(t: &Trace) -> (Vec<EventId>, Vec<Vec<bool>>) {
    let ids: Vec<EventId> = t.events.iter().map(|e| e.id).collect();
    let pos: HashMap<(usize, u32), usize> = ids.iter().enumerate().map(|(i, e)| ((e.process, e.index), i)).collect();
    let m = ids.len();
    let mut succ = vec![Vec::new(); m];
    for (i, e) in ids.iter().enumerate() {
        if let Some(&j) = pos.get(&(e.process, e.index + 1)) {
            succ[i].push(j);
        }
    }
    for msg in &t.messages {
        succ[pos[&(msg.send.process, msg.send.index)]].push(pos[&(msg.receive.process, msg.receive.index)]);
    }
    let mut reach = vec![vec![false; m]; m];
    for (a, row) in reach.iter_mut().enumerate() {
        let mut stack = succ[a].clone();
        while let Some(b) = stack.pop() {
            if !row[b] {
                row[b] = true;
                stack.extend(succ[b].iter().copied());
            }
        }
    }
    (ids, reach)
}

#[test]
fn clocks_encode_reachability_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for round in 0..250 {
        let n = 2 + round % 3;
        let t = random_trace(&mut rng, n, 30, 0.4);
        let (ids, reach) = reachability(&t);
        let clock: HashMap<(usize, u32), &VectorClock> =
            t.events.iter().map(|e| ((e.id.process, e.id.index), &e.clock)).collect();
        for (a, ea) in ids.iter().enumerate() {
            for (b, eb) in ids.iter().enumerate() {
                let ca = clock[&(ea.process, ea.index)];
                let cb = clock[&(eb.process, eb.index)];
                assert_eq!(event_happens_before((ea, ca), (eb, cb)), reach[a][b], "round {round}: {ea:?} vs {eb:?}");
            }
        }

        // A state ends with the event after it and begins with its own event.
        let event_at: HashMap<(usize, u32), usize> =
            ids.iter().enumerate().map(|(i, e)| ((e.process, e.index), i)).collect();
        let states: Vec<&LocalState> = t.all_states().map(|r| &r.state).collect();
        for s1 in &states {
            for s2 in &states {
                let want = if s1.process == s2.process {
                    s1.index < s2.index
                } else {
                    match event_at.get(&(s1.process, s1.index + 1)) {
                        Some(&end) => reach[end][event_at[&(s2.process, s2.index)]],
                        None => false,
                    }
                };
                assert_eq!(state_happens_before(s1, s2), want, "round {round}");
                if s1.process != s2.process {
                    assert_eq!(concurrent(s1, s2).unwrap(), !want && !state_happens_before(s2, s1));
                }
            }
        }
    }
}

#[test]
fn concrete_state_orders() {
    // P0: e0 internal, e1 receive (from P1's e3). P1: e0..e2 internal, e3 send.
    let s = |p: usize, i: u32, c: &[u32]| {
        LocalState::new(p, i, VectorClock::from_components(c.to_vec()), Default::default())
    };
    let s1_1 = s(0, 1, &[2, 4]);
    let s2_2 = s(1, 2, &[0, 3]);
    let s2_3 = s(1, 3, &[0, 4]);
    assert!(state_happens_before(&s2_2, &s1_1));
    assert!(concurrent(&s1_1, &s2_3).unwrap());
    assert!(concurrent(&s1_1, &s1_1.clone()).is_err());
}

fn clock_pair(n: usize) -> impl Strategy<Value = (Vec<u32>, Vec<u32>, Vec<u32>)> {
    (prop::collection::vec(0u32..50, n), prop::collection::vec(0u32..50, n), prop::collection::vec(0u32..50, n))
}

proptest! {
    #[test]
    fn merge_is_a_join((a, b, c) in (1usize..6).prop_flat_map(clock_pair)) {
        let (a, b, c) = (VectorClock::from_components(a), VectorClock::from_components(b), VectorClock::from_components(c));
        let ab = merge(&a, &b).unwrap();
        prop_assert_eq!(&ab, &merge(&b, &a).unwrap());
        prop_assert_eq!(merge(&ab, &c).unwrap(), merge(&a, &merge(&b, &c).unwrap()).unwrap());
        prop_assert_eq!(&merge(&a, &a).unwrap(), &a);
        prop_assert!(a.dominated_by(&ab) && b.dominated_by(&ab));
        if a.dominated_by(&b) {
            prop_assert_eq!(&ab, &b);
        }
    }

    #[test]
    fn merge_rejects_length_mismatch(a in prop::collection::vec(0u32..9, 1..5), extra in 1usize..3) {
        let b = vec![0; a.len() + extra];
        prop_assert!(merge(&VectorClock::from_components(a), &VectorClock::from_components(b)).is_err());
    }
}
