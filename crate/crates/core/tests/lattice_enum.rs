//! The full lattice built by search against exhaustive enumeration of every
//! index tuple.

use latwin::oracle::random_trace;
use latwin::{
    build_full_lattice, build_full_lattice_bounded, consistent_cuts_by_product, count_full_lattice, is_consistent,
    join, meet, precede, Cut, CutLattice, Trace,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn brute_force(t: &Trace) -> Vec<Cut> {
    let sizes: Vec<u32> = (0..t.n).map(|k| t.state_count(k) as u32).collect();
    let mut out = Vec::new();
    let mut cur = vec![0u32; t.n];
    loop {
        if is_consistent((0..t.n).map(|k| t.local_state(k, cur[k]).unwrap())) {
            out.push(Cut::new(cur.clone()));
        }
        let mut k = 0;
        loop {
            if k == t.n {
                out.sort();
                return out;
            }
            cur[k] += 1;
            if cur[k] < sizes[k] {
                break;
            }
            cur[k] = 0;
            k += 1;
        }
    }
}

#[test]
fn search_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for round in 0..300 {
        let n = 1 + round % 4;
        let t = random_trace(&mut rng, n, 9, 0.4);
        let want = brute_force(&t);
        let full = build_full_lattice(&t).unwrap();
        assert_eq!(full.nodes(), &want[..], "round {round}");
        let mut product = consistent_cuts_by_product(&t).unwrap();
        product.sort();
        assert_eq!(product, want);
        assert_eq!(count_full_lattice(&t, usize::MAX).unwrap(), want.len());
        assert!(build_full_lattice_bounded(&t, want.len() - 1).is_err() || want.len() == 1);

        let edges = full.edges();
        let expected_edges: usize = want.iter().map(|a| want.iter().filter(|b| precede(a, b)).count()).sum();
        assert_eq!(edges.len(), expected_edges);
        assert!(edges.iter().all(|(a, b)| precede(a, b)));

        // Consistent cuts are closed under meet and join.
        for a in want.iter().step_by(3) {
            for b in want.iter().step_by(2) {
                assert!(full.contains(&meet(a, b)) && full.contains(&join(a, b)));
            }
        }
        assert_eq!(full.bottom(), want.first());
        assert_eq!(full.top(), want.last());
    }
}
