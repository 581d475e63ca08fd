//! The hand-checked two-process run shared by the golden and acceptance tests.

use latwin::{Payload, Trace, TraceBuilder};

/// Delivery order used with w = 3.
pub const ORDER: [(usize, u32); 11] =
    [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2), (0, 3), (1, 3), (0, 4), (1, 4), (0, 5)];

/// One reconstruction satisfying every relation the worked example asserts:
/// state 2 of process 1 happens before state 1 of process 0, state 4 of
/// process 0 happens before state 5 of process 1, (1, 3) is consistent while
/// (1, 2), (4, 3) and (4, 5) are not. Other traces satisfy them too.
///
/// Process 0 receives m1 at its event 1 and m2 at event 4, then sends m3 at
/// event 5. Process 1 sends m1 at event 3, m2 at event 4 and receives m3 at
/// event 5.
pub fn golden_trace() -> Trace {
    let mut b = TraceBuilder::new(2, vec![]);
    let p = Payload::new;
    let mut t = 0.0;
    let mut tick = || {
        t += 1.0;
        t
    };
    for _ in 0..3 {
        b.internal(1, tick(), p());
    }
    let m1 = b.send(1, tick(), p());
    b.internal(0, tick(), p());
    b.receive(0, m1, tick(), p());
    b.internal(0, tick(), p());
    b.internal(0, tick(), p());
    let m2 = b.send(1, tick(), p());
    b.receive(0, m2, tick(), p());
    let m3 = b.send(0, tick(), p());
    b.receive(1, m3, tick(), p());
    b.finish(tick())
}
