//! Arrival order does not matter for the final window lattice, and the
//! reorder buffer releases exactly the gapless prefix.

use latwin::engine::ReorderQueue;
use latwin::oracle::{random_arrivals, random_trace};
use latwin::{build_full_lattice, CutLattice, LatWin, LocalState};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn final_lattice_is_independent_of_arrival_order(seed in any::<u64>(), order_a in any::<u64>(), order_b in any::<u64>(), n in 2usize..4, w in 1usize..5) {
        let trace = random_trace(&mut ChaCha8Rng::seed_from_u64(seed), n, 12, 0.4);
        let full = build_full_lattice(&trace).unwrap();
        let mut views = Vec::new();
        for order in [order_a, order_b] {
            let mut e = LatWin::new(n, w).unwrap();
            for s in random_arrivals(&mut ChaCha8Rng::seed_from_u64(order), &trace) {
                e.receive(s).unwrap();
            }
            e.validate().unwrap();
            let mut want: Vec<_> = full.in_box(&e.window_ranges()).into_iter().collect();
            want.sort();
            let view = e.view();
            prop_assert_eq!(&view.nodes, &want);
            prop_assert_eq!(e.node_count(), want.len());
            views.push(view);
        }
        prop_assert_eq!(&views[0].nodes, &views[1].nodes);
        prop_assert_eq!(&views[0].edges, &views[1].edges);
    }

    #[test]
    fn reorder_releases_in_sequence(perm in Just((0u32..20).collect::<Vec<_>>()).prop_shuffle()) {
        let mut q = ReorderQueue::new();
        let mut released = Vec::new();
        for &i in &perm {
            let s = LocalState::new(0, i, latwin::VectorClock::from_components(vec![i + 1]), Default::default());
            for r in q.on_receive(s) {
                released.push(r.index);
            }
            let mut expect_len = 0u32;
            while perm.iter().take_while(|&&x| x != i).chain(std::iter::once(&i)).any(|&x| x == expect_len) {
                expect_len += 1;
            }
            prop_assert_eq!(released.len() as u32, expect_len);
        }
        prop_assert_eq!(released, (0..20).collect::<Vec<_>>());
    }
}
