//! Sliding-window maintenance of the lattice of consistent global states
//! over asynchronous streams of local states, with predicate detection on
//! top and a simulator for evaluating it.

pub mod baseline;
pub mod clock;
pub mod detect;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod lattice;
pub mod oracle;
pub mod sim;
pub mod trace;

pub use clock::{
    concurrent, event_happens_before, merge, state_happens_before, EventId, EventKind, LocalState, Payload, VectorClock,
};
pub use detect::{detect, eval_cgs, DetectionOutcome, Modality, Property, TransitionCounter};
pub use engine::{EngineStats, LatWin, LatWinView, StepOrder, UpdateReport};
pub use error::{Error, Result};
pub use lattice::{
    build_full_lattice, build_full_lattice_bounded, consistent_cuts_by_product, count_full_lattice, is_consistent,
    is_convex_sublattice, join, leads_to, meet, precede, Cut, CutLattice, FullLattice, GlobalState,
};
pub use sim::{deliver, generate, ground_truth, Delivery, Seconds, SimConfig};
pub use trace::{read_jsonl, write_jsonl, Trace, TraceBuilder, TraceRecord};
