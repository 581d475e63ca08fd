//! Seeded discrete-event simulation of `n` monitored processes.
//!
//! Each process alternates active and idle phases with exponentially
//! distributed lengths, samples its sensor on a fixed period and exchanges
//! occasional peer messages. Every phase change, sample, send and receive is
//! an event starting a new local state whose payload records `active`. Each
//! state is then shipped to the checker with an exponential delay.
//!
//! Independent random streams drive phases, sampling offsets, messaging and
//! delays, so changing one parameter (say the delay) leaves the others' draws
//! untouched.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Exp1};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize};

use crate::clock::{LocalState, Payload};
use crate::detect::Property;
use crate::error::{Error, Result};
use crate::trace::{Trace, TraceBuilder};

pub const ACTIVE: &str = "active";

/// A duration in seconds. Deserializes from a number of seconds or from a
/// string such as `"25min"`, `"0.5s"`, `"250ms"` or `"2h"`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Seconds(pub f64);

impl Seconds {
    pub fn minutes(m: f64) -> Self {
        Seconds(m * 60.0)
    }

    pub fn hours(h: f64) -> Self {
        Seconds(h * 3600.0)
    }
}

impl fmt::Display for Seconds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}s", self.0)
    }
}

impl std::str::FromStr for Seconds {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let split = s.find(|c: char| c.is_ascii_alphabetic()).unwrap_or(s.len());
        let (num, unit) = s.split_at(split);
        let value: f64 = num.trim().parse().map_err(|_| Error::Config(format!("bad duration `{s}`")))?;
        let scale = match unit.trim() {
            "" | "s" | "sec" | "secs" => 1.0,
            "ms" => 1e-3,
            "m" | "min" | "mins" => 60.0,
            "h" | "hr" | "hrs" => 3600.0,
            other => return Err(Error::Config(format!("unknown duration unit `{other}`"))),
        };
        Ok(Seconds(value * scale))
    }
}

impl<'de> Deserialize<'de> for Seconds {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Seconds;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("seconds as a number or a string with a unit")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Seconds, E> {
                Ok(Seconds(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Seconds, E> {
                Ok(Seconds(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Seconds, E> {
                Ok(Seconds(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Seconds, E> {
                v.parse().map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n: usize,
    pub seed: u64,
    pub mean_activity: Seconds,
    pub mean_gap: Seconds,
    pub sample_period: Seconds,
    pub mean_delay: Seconds,
    pub lifetime: Seconds,
    /// Peer messages sent per process per hour.
    pub peer_msg_rate: f64,
    pub w: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: 3,
            seed: 1,
            mean_activity: Seconds::minutes(25.0),
            mean_gap: Seconds::minutes(5.0),
            sample_period: Seconds::minutes(1.0),
            mean_delay: Seconds(0.5),
            lifetime: Seconds::hours(2.0),
            peer_msg_rate: 6.0,
            w: 4,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if self.w == 0 {
            return Err(Error::Config("w must be at least 1".into()));
        }
        for (name, d) in [
            ("mean_activity", self.mean_activity),
            ("mean_gap", self.mean_gap),
            ("sample_period", self.sample_period),
            ("lifetime", self.lifetime),
        ] {
            if !(d.0 > 0.0 && d.0.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {}", d.0)));
            }
        }
        if !(self.mean_delay.0 >= 0.0 && self.mean_delay.0.is_finite()) {
            return Err(Error::Config("mean_delay must be non-negative".into()));
        }
        if !(self.peer_msg_rate >= 0.0 && self.peer_msg_rate.is_finite()) {
            return Err(Error::Config("peer_msg_rate must be non-negative".into()));
        }
        Ok(())
    }
}

fn stream(seed: u64, tag: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tag);
    rng
}

const PHASES: u64 = 1;
const TICKS: u64 = 2;
const PEERS: u64 = 3;
const DELIVERY: u64 = 4;

fn exp_draw(rng: &mut ChaCha8Rng, mean: f64) -> f64 {
    if mean <= 0.0 {
        // Keep the stream aligned across parameter values.
        let _: f64 = Exp1.sample(rng);
        return 0.0;
    }
    let x: f64 = Exp1.sample(rng);
    x * mean
}

/// Phase boundaries of one process: `(time, active)` with the first entry at
/// time 0.
fn phases(config: &SimConfig, rng: &mut ChaCha8Rng) -> Vec<(f64, bool)> {
    let (ma, mg) = (config.mean_activity.0, config.mean_gap.0);
    let mut active = rng.random_bool(ma / (ma + mg));
    let mut t = 0.0;
    let mut out = vec![(0.0, active)];
    let on = Exp::new(1.0 / ma).expect("positive mean");
    let off = Exp::new(1.0 / mg).expect("positive mean");
    loop {
        t += if active { on.sample(rng) } else { off.sample(rng) };
        if t >= config.lifetime.0 {
            return out;
        }
        active = !active;
        out.push((t, active));
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Step {
    Internal,
    Send(usize),
    Receive(usize),
}

impl Step {
    fn rank(self) -> u8 {
        match self {
            Step::Internal | Step::Send(_) => 0,
            Step::Receive(_) => 1,
        }
    }
}

pub fn generate(config: &SimConfig) -> Result<Trace> {
    config.validate()?;
    let n = config.n;
    let lifetime = config.lifetime.0;
    let mut schedule: Vec<(f64, usize, Step)> = Vec::new();
    let mut phase_lists = Vec::with_capacity(n);
    for k in 0..n {
        let mut rng = stream(config.seed.wrapping_add(k as u64 * 0x9E37_79B9), PHASES);
        let list = phases(config, &mut rng);
        for &(t, _) in &list[1..] {
            schedule.push((t, k, Step::Internal));
        }
        phase_lists.push(list);

        let mut rng = stream(config.seed.wrapping_add(k as u64 * 0x9E37_79B9), TICKS);
        let period = config.sample_period.0;
        let mut t = rng.random::<f64>() * period;
        while t < lifetime {
            if t > 0.0 {
                schedule.push((t, k, Step::Internal));
            }
            t += period;
        }
    }

    let mut msg_id = 0;
    if n > 1 && config.peer_msg_rate > 0.0 {
        let mean_gap = 3600.0 / config.peer_msg_rate;
        for k in 0..n {
            let mut rng = stream(config.seed.wrapping_add(k as u64 * 0x9E37_79B9), PEERS);
            let mut t = exp_draw(&mut rng, mean_gap);
            while t < lifetime {
                let mut dest = rng.random_range(0..n - 1);
                if dest >= k {
                    dest += 1;
                }
                let recv = t + exp_draw(&mut rng, config.mean_delay.0);
                schedule.push((t, k, Step::Send(msg_id)));
                if recv < lifetime {
                    schedule.push((recv, dest, Step::Receive(msg_id)));
                }
                msg_id += 1;
                t += exp_draw(&mut rng, mean_gap);
            }
        }
    }
    schedule
        .sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.rank().cmp(&b.2.rank())).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let payload = |active: bool| -> Payload { [(ACTIVE.to_string(), active)].into_iter().collect() };
    let mut builder = TraceBuilder::new(n, vec![ACTIVE.to_string()]);
    let mut phase_pos = vec![0usize; n];
    for (k, list) in phase_lists.iter().enumerate() {
        builder.internal(k, 0.0, payload(list[0].1));
    }
    let mut in_flight = HashMap::new();
    for (t, k, step) in schedule {
        let list = &phase_lists[k];
        while phase_pos[k] + 1 < list.len() && list[phase_pos[k] + 1].0 <= t {
            phase_pos[k] += 1;
        }
        let p = payload(list[phase_pos[k]].1);
        match step {
            Step::Internal => {
                builder.internal(k, t, p);
            }
            Step::Send(id) => {
                in_flight.insert(id, builder.send(k, t, p));
            }
            Step::Receive(id) => {
                let token = in_flight.remove(&id).expect("send precedes receive");
                builder.receive(k, token, t, p);
            }
        }
    }
    Ok(builder.finish(lifetime))
}

/// One state shipped to the checker.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Delivery {
    pub arrival: f64,
    pub state: LocalState,
}

/// Assigns every state an arrival time `begin + Exp(mean_delay)` and returns
/// all of them sorted by arrival. Sequence numbers follow emission order.
pub fn deliver(trace: &Trace, config: &SimConfig) -> Vec<Delivery> {
    let mut out = Vec::with_capacity(trace.total_states());
    for (k, list) in trace.states.iter().enumerate() {
        let mut rng = stream(config.seed.wrapping_add(k as u64 * 0x9E37_79B9), DELIVERY);
        for (seq, rec) in list.iter().enumerate() {
            let mut state = rec.state.clone();
            state.seq = seq as u64;
            out.push(Delivery { arrival: rec.begin + exp_draw(&mut rng, config.mean_delay.0), state });
        }
    }
    out.sort_by(|a, b| {
        a.arrival
            .total_cmp(&b.arrival)
            .then(a.state.process.cmp(&b.state.process))
            .then(a.state.index.cmp(&b.state.index))
    });
    out
}

fn intersect(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if lo < hi {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Merged true-time intervals of process `k` during which `predicate` holds,
/// clipped to `[t0, t1]`.
pub fn truth_intervals(trace: &Trace, k: usize, predicate: &str, span: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for rec in &trace.states[k] {
        let v = *rec.state.payload.get(predicate).ok_or_else(|| Error::UnknownPredicate(predicate.to_string()))?;
        let lo = rec.begin.max(span.0);
        let hi = rec.end.min(span.1);
        if !v || lo >= hi {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.1 >= lo => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    Ok(out)
}

/// Whether at some instant of `[t0, t1]` every local predicate of `prop`
/// holds simultaneously in true time.
pub fn ground_truth(trace: &Trace, prop: &Property, window_span: (f64, f64)) -> Result<bool> {
    if prop.locals.len() != trace.n {
        return Err(Error::PropertyArity { expected: prop.locals.len(), found: trace.n });
    }
    let (t0, t1) = window_span;
    if t0 > t1 {
        return Err(Error::Config(format!("empty time span [{t0}, {t1}]")));
    }
    let mut acc = vec![(t0, t1)];
    for (k, name) in prop.locals.iter().enumerate() {
        acc = intersect(&acc, &truth_intervals(trace, k, name, (t0, t1))?);
        if acc.is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::concurrent;
    use crate::detect::Modality;

    #[test]
    fn durations_parse_with_units() {
        assert_eq!("25min".parse::<Seconds>().unwrap().0, 1500.0);
        assert_eq!("0.5s".parse::<Seconds>().unwrap().0, 0.5);
        assert_eq!("250ms".parse::<Seconds>().unwrap().0, 0.25);
        assert_eq!("2h".parse::<Seconds>().unwrap().0, 7200.0);
        assert_eq!("3".parse::<Seconds>().unwrap().0, 3.0);
        assert!("3 fortnights".parse::<Seconds>().is_err());
        let c: SimConfig = serde_json::from_str(r#"{"mean_delay": "2s", "lifetime": 600, "n": 2}"#).unwrap();
        assert_eq!(c.mean_delay.0, 2.0);
        assert_eq!(c.lifetime.0, 600.0);
        assert_eq!(c.mean_activity.0, 1500.0);
    }

    #[test]
    fn rejects_bad_configs() {
        let c = SimConfig { n: 0, ..SimConfig::default() };
        assert!(generate(&c).is_err());
        let c = SimConfig { sample_period: Seconds(0.0), ..SimConfig::default() };
        assert!(c.validate().is_err());
        assert!(serde_json::from_str::<SimConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn same_seed_same_trace() {
        let c = SimConfig { lifetime: Seconds::hours(0.5), ..SimConfig::default() };
        assert_eq!(generate(&c).unwrap(), generate(&c).unwrap());
        let other = SimConfig { seed: 2, ..c.clone() };
        assert_ne!(generate(&c).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn no_peer_messages_means_full_concurrency() {
        let c = SimConfig { peer_msg_rate: 0.0, lifetime: Seconds::hours(0.3), ..SimConfig::default() };
        let t = generate(&c).unwrap();
        assert!(t.messages.is_empty());
        for a in t.states[0].iter() {
            for b in t.states[1].iter().chain(&t.states[2]) {
                assert!(concurrent(&a.state, &b.state).unwrap());
            }
        }
    }

    #[test]
    fn zero_delay_preserves_emission_order() {
        let c = SimConfig { mean_delay: Seconds(0.0), lifetime: Seconds::hours(0.5), ..SimConfig::default() };
        let t = generate(&c).unwrap();
        let d = deliver(&t, &c);
        for pair in d.windows(2) {
            assert!(pair[0].arrival <= pair[1].arrival);
        }
        for (i, del) in d.iter().enumerate() {
            assert_eq!(del.arrival, t.state(del.state.process, del.state.index).unwrap().begin, "at {i}");
        }
    }

    #[test]
    fn ground_truth_examples() {
        let mut b = TraceBuilder::new(2, vec![ACTIVE.into()]);
        let p = |v: bool| -> Payload { [(ACTIVE.to_string(), v)].into_iter().collect() };
        b.internal(0, 0.0, p(true));
        b.internal(1, 0.0, p(true));
        let t = b.finish(10.0);
        let prop = Property::uniform("both", Modality::Definitely, ACTIVE, 2);
        assert!(ground_truth(&t, &prop, (0.0, 10.0)).unwrap());

        let mut b = TraceBuilder::new(2, vec![ACTIVE.into()]);
        b.internal(0, 0.0, p(true));
        b.internal(1, 0.0, p(false));
        b.internal(0, 5.0, p(false));
        b.internal(1, 5.0, p(true));
        let t = b.finish(10.0);
        assert!(!ground_truth(&t, &prop, (0.0, 10.0)).unwrap());
        assert!(ground_truth(&t, &prop, (5.0, 4.0)).is_err());
    }
}
