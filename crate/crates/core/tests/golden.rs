//! Hand-checked two-process run with three messages, delivered with w = 3.

mod common;

use common::{golden_trace, ORDER};
use latwin::{build_full_lattice, is_convex_sublattice, Cut, CutLattice, LatWin, LocalState, Trace};

fn c(i: u32, j: u32) -> Cut {
    Cut::new(vec![i, j])
}

fn cuts(v: &[(u32, u32)]) -> Vec<Cut> {
    let mut out: Vec<Cut> = v.iter().map(|&(i, j)| c(i, j)).collect();
    out.sort();
    out
}

fn state(t: &Trace, k: usize, i: u32) -> LocalState {
    t.local_state(k, i).unwrap().clone()
}

#[test]
fn clocks_match_hand_computation() {
    let t = golden_trace();
    let clocks =
        |k: usize| -> Vec<Vec<u32>> { t.states[k].iter().map(|r| r.state.clock.components().to_vec()).collect() };
    assert_eq!(clocks(0), vec![vec![1, 0], vec![2, 4], vec![3, 4], vec![4, 4], vec![5, 5], vec![6, 5]]);
    assert_eq!(clocks(1), vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![0, 4], vec![0, 5], vec![6, 6]]);
}

#[test]
fn window_lattice_evolves_as_narrated() {
    let t = golden_trace();
    let order = ORDER;
    let mut e = LatWin::new(2, 3).unwrap();
    let mut reports = Vec::new();
    for &(k, i) in &order {
        let r = e.receive(state(&t, k, i)).unwrap();
        assert_eq!(r.len(), 1);
        e.validate().unwrap();
        reports.push(r.into_iter().next().unwrap());
    }

    // Before process 0 moves past its state 0, the cuts (0, j) exist. Its
    // state 3 evicts state 0 and leaves the window {1..3} x {0..2} empty,
    // since state 1 of process 0 already knows state 3 of process 1.
    assert_eq!(reports[5].c_max, Some(c(0, 2)));
    let r = &reports[6];
    assert!(r.added.is_empty());
    assert_eq!(r.removed, cuts(&[(0, 0), (0, 1), (0, 2)]));
    assert_eq!(r.node_count, 0);
    assert_eq!(e_nodes_after(&t, &order[..7]), Vec::<Cut>::new());

    let r = &reports[7];
    assert_eq!(r.added, cuts(&[(1, 3), (2, 3), (3, 3)]));
    assert_eq!((r.c_min.clone(), r.c_max.clone()), (Some(c(1, 3)), Some(c(3, 3))));

    let r = &reports[8];
    assert!(r.added.is_empty());
    assert_eq!(r.removed, cuts(&[(1, 3)]));
    assert_eq!(r.c_min, Some(c(2, 3)));

    let r = &reports[9];
    assert!(r.removed.is_empty());
    let nodes: Vec<Cut> = e_nodes_after(&t, &order[..10]);
    assert_eq!(nodes, cuts(&[(2, 3), (2, 4), (3, 3), (3, 4), (4, 4)]));
    assert_eq!(r.c_max, Some(c(4, 4)));

    let r = &reports[10];
    assert_eq!(r.added, cuts(&[(5, 4)]));
    assert_eq!(r.removed, cuts(&[(2, 3), (2, 4)]));
    assert_eq!((r.c_min.clone(), r.c_max.clone()), (Some(c(3, 3)), Some(c(5, 4))));
    assert_eq!(e.view().nodes, cuts(&[(3, 3), (3, 4), (4, 4), (5, 4)]));

    let full = build_full_lattice(&t).unwrap();
    assert!(is_convex_sublattice(e.cuts(), &full));
}

fn e_nodes_after(t: &Trace, prefix: &[(usize, u32)]) -> Vec<Cut> {
    let mut e = LatWin::new(2, 3).unwrap();
    for &(k, i) in prefix {
        e.receive(state(t, k, i)).unwrap();
    }
    e.view().nodes
}

#[test]
fn full_lattice_of_the_run() {
    let t = golden_trace();
    let full = build_full_lattice(&t).unwrap();
    let expected = cuts(&[
        (0, 0),
        (0, 1),
        (0, 2),
        (0, 3),
        (0, 4),
        (1, 3),
        (2, 3),
        (3, 3),
        (1, 4),
        (2, 4),
        (3, 4),
        (4, 4),
        (5, 4),
        (5, 5),
    ]);
    assert_eq!(full.nodes(), &expected[..]);
    assert_eq!(full.bottom(), Some(&c(0, 0)));
    assert_eq!(full.top(), Some(&c(5, 5)));
}
