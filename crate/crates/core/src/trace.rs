//! Recorded runs: events, messages and the local states between events, plus
//! the JSON-lines record format used for replay.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::clock::{merge, EventId, EventKind, LocalState, Payload, VectorClock};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub id: EventId,
    pub clock: VectorClock,
    pub time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MessageRecord {
    pub send: EventId,
    pub receive: EventId,
    pub delay: f64,
}

/// A local state together with its true-time interval `[begin, end)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub state: LocalState,
    pub begin: f64,
    pub end: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub n: usize,
    /// Events in the order they were recorded (a causal order).
    pub events: Vec<EventRecord>,
    pub messages: Vec<MessageRecord>,
    /// `states[k][i]` is `s^(k)_i`.
    pub states: Vec<Vec<StateRecord>>,
    pub schema: Vec<String>,
}

impl Trace {
    pub fn state(&self, process: usize, index: u32) -> Option<&StateRecord> {
        self.states.get(process)?.get(index as usize)
    }

    pub fn local_state(&self, process: usize, index: u32) -> Option<&LocalState> {
        self.state(process, index).map(|r| &r.state)
    }

    pub fn state_count(&self, process: usize) -> usize {
        self.states.get(process).map_or(0, Vec::len)
    }

    pub fn total_states(&self) -> usize {
        self.states.iter().map(Vec::len).sum()
    }

    /// All states, process by process.
    pub fn all_states(&self) -> impl Iterator<Item = &StateRecord> {
        self.states.iter().flatten()
    }

    /// Rebuilds a trace from bare local states (for instance a replayed
    /// JSON-lines file). Events and messages are not recoverable and are left
    /// empty.
    pub fn from_states(n: usize, states: impl IntoIterator<Item = StateRecord>) -> Result<Trace> {
        let mut per: Vec<Vec<StateRecord>> = vec![Vec::new(); n];
        for rec in states {
            rec.state.validate(n)?;
            per[rec.state.process].push(rec);
        }
        for (k, list) in per.iter_mut().enumerate() {
            list.sort_by_key(|r| r.state.index);
            for (i, rec) in list.iter().enumerate() {
                if rec.state.index != i as u32 {
                    return Err(Error::TraceGap { process: k, expected: i as u32, found: rec.state.index });
                }
            }
        }
        let mut schema: Vec<String> =
            per.iter().flatten().next().map(|r| r.state.payload.keys().cloned().collect()).unwrap_or_default();
        schema.sort();
        Ok(Trace { n, events: Vec::new(), messages: Vec::new(), states: per, schema })
    }

    /// Checks that every process has gapless state indices starting at 0.
    pub fn check_gapless(&self) -> Result<()> {
        if self.states.len() != self.n {
            return Err(Error::Config(format!("trace has {} state lists for {} processes", self.states.len(), self.n)));
        }
        for (k, list) in self.states.iter().enumerate() {
            for (i, rec) in list.iter().enumerate() {
                if rec.state.index != i as u32 || rec.state.process != k {
                    return Err(Error::TraceGap { process: k, expected: i as u32, found: rec.state.index });
                }
            }
        }
        Ok(())
    }

    /// Replays the recorded events and messages and returns the clock every
    /// event should carry. Used to cross-check stored clocks.
    pub fn recompute_clocks(&self) -> Result<Vec<VectorClock>> {
        let mut sent: HashMap<(usize, u32), VectorClock> = HashMap::new();
        let receive_of: HashMap<(usize, u32), (usize, u32)> = self
            .messages
            .iter()
            .map(|m| ((m.receive.process, m.receive.index), (m.send.process, m.send.index)))
            .collect();
        let mut current = vec![VectorClock::zero(self.n); self.n];
        let mut out = Vec::with_capacity(self.events.len());
        for ev in &self.events {
            let p = ev.id.process;
            let mut c = current[p].clone();
            if ev.id.kind == EventKind::Receive {
                let src = receive_of
                    .get(&(p, ev.id.index))
                    .ok_or_else(|| Error::Config(format!("receive {p}:{} has no message", ev.id.index)))?;
                let sc = sent
                    .get(src)
                    .ok_or_else(|| Error::Config(format!("receive {p}:{} precedes its send", ev.id.index)))?;
                c = merge(&c, sc)?;
            }
            c.tick(p);
            if ev.id.kind == EventKind::Send {
                sent.insert((p, ev.id.index), c.clone());
            }
            current[p] = c.clone();
            out.push(c);
        }
        Ok(out)
    }
}

/// Token returned by [`TraceBuilder::send`], consumed by a matching receive.
#[derive(Clone, Debug)]
pub struct MessageToken {
    send: EventId,
    clock: VectorClock,
    time: f64,
}

impl MessageToken {
    pub fn send_event(&self) -> EventId {
        self.send
    }
}

/// Builds a trace event by event, computing vector clocks along the way.
/// Every event begins a new local state carrying the given payload.
#[derive(Debug)]
pub struct TraceBuilder {
    n: usize,
    clocks: Vec<VectorClock>,
    trace: Trace,
}

impl TraceBuilder {
    pub fn new(n: usize, schema: Vec<String>) -> Self {
        TraceBuilder {
            n,
            clocks: vec![VectorClock::zero(n); n],
            trace: Trace { n, events: Vec::new(), messages: Vec::new(), states: vec![Vec::new(); n], schema },
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn next_index(&self, process: usize) -> u32 {
        self.trace.states[process].len() as u32
    }

    fn record(&mut self, process: usize, kind: EventKind, time: f64, clock: VectorClock, payload: Payload) -> EventId {
        let index = self.next_index(process);
        let id = EventId { process, index, kind };
        if let Some(prev) = self.trace.states[process].last_mut() {
            prev.end = time;
        }
        self.trace.states[process].push(StateRecord {
            state: LocalState::new(process, index, clock.clone(), payload),
            begin: time,
            end: f64::INFINITY,
        });
        self.trace.events.push(EventRecord { id, clock: clock.clone(), time });
        self.clocks[process] = clock;
        id
    }

    pub fn internal(&mut self, process: usize, time: f64, payload: Payload) -> EventId {
        let mut c = self.clocks[process].clone();
        c.tick(process);
        self.record(process, EventKind::Internal, time, c, payload)
    }

    pub fn send(&mut self, process: usize, time: f64, payload: Payload) -> MessageToken {
        let mut c = self.clocks[process].clone();
        c.tick(process);
        let id = self.record(process, EventKind::Send, time, c.clone(), payload);
        MessageToken { send: id, clock: c, time }
    }

    pub fn receive(&mut self, process: usize, token: MessageToken, time: f64, payload: Payload) -> EventId {
        let mut c = merge(&self.clocks[process], &token.clock).expect("clocks of one run share a length");
        c.tick(process);
        let id = self.record(process, EventKind::Receive, time, c, payload);
        self.trace.messages.push(MessageRecord { send: token.send, receive: id, delay: time - token.time });
        id
    }

    /// Closes every open state at `end_time`.
    pub fn finish(mut self, end_time: f64) -> Trace {
        for list in &mut self.trace.states {
            if let Some(last) = list.last_mut() {
                last.end = end_time.max(last.begin);
            }
        }
        self.trace
    }
}

/// One delivered local state, as exchanged in JSON-lines replay files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub process: usize,
    pub index: u32,
    pub seq: u64,
    pub clock: Vec<u32>,
    #[serde(default)]
    pub payload: Payload,
    pub true_time_begin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_time_end: Option<f64>,
}

impl TraceRecord {
    pub fn from_state(rec: &StateRecord) -> Self {
        TraceRecord {
            process: rec.state.process,
            index: rec.state.index,
            seq: rec.state.seq,
            clock: rec.state.clock.components().to_vec(),
            payload: rec.state.payload.clone(),
            true_time_begin: rec.begin,
            true_time_end: rec.end.is_finite().then_some(rec.end),
        }
    }

    pub fn to_local_state(&self) -> LocalState {
        LocalState {
            process: self.process,
            index: self.index,
            clock: VectorClock::from_components(self.clock.clone()),
            seq: self.seq,
            payload: self.payload.clone(),
        }
    }

    pub fn to_state_record(&self) -> StateRecord {
        StateRecord {
            state: self.to_local_state(),
            begin: self.true_time_begin,
            end: self.true_time_end.unwrap_or(f64::INFINITY),
        }
    }
}

pub fn write_jsonl<'a, W: Write>(mut out: W, records: impl IntoIterator<Item = &'a TraceRecord>) -> Result<()> {
    for rec in records {
        serde_json::to_writer(&mut out, rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads records, skipping blank lines.
pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<TraceRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|source| Error::Parse { line: i + 1, source })?;
        out.push(rec);
    }
    Ok(out)
}
