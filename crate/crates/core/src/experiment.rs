//! Seeded parameter sweeps comparing the windowed lattice with the unwindowed
//! baseline and with the simulated ground truth.
//!
//! Every sweep point replays the same seeds. A detection is a false-to-true
//! transition of the verdict, sampled after every advance. Ratios are
//! computed per seed and then averaged; seeds whose denominator is zero are
//! left out of that ratio.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::LatBaseline;
use crate::clock::LocalState;
use crate::detect::{detect, Modality, Property, TransitionCounter};
use crate::engine::{LatWin, ReorderQueue};
use crate::error::{Error, Result};
use crate::sim::{deliver, generate, ground_truth, Seconds, SimConfig, ACTIVE};
use crate::trace::Trace;

pub const CSV_HEADER: &str = "sweep,param,seed_count,perc_det,perc_s,prob_det,s_latwin,t_latwin_us,theta_fit";

pub const DEFAULT_LAT_BUDGET: usize = 5_000_000;

/// Property as written in a config file. A single local predicate applies to
/// every process.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertySpec {
    pub name: String,
    #[serde(default = "default_modality")]
    pub modality: Modality,
    pub locals: Vec<String>,
}

fn default_modality() -> Modality {
    Modality::Definitely
}

impl PropertySpec {
    pub fn resolve(&self, n: usize) -> Result<Property> {
        let locals = match self.locals.len() {
            1 => vec![self.locals[0].clone(); n],
            m if m == n => self.locals.clone(),
            m => return Err(Error::PropertyArity { expected: m, found: n }),
        };
        Ok(Property { name: self.name.clone(), modality: self.modality, locals })
    }
}

impl Default for PropertySpec {
    fn default() -> Self {
        PropertySpec { name: "all_active".into(), modality: Modality::Definitely, locals: vec![ACTIVE.into()] }
    }
}

/// Simulation parameters plus sweep settings. Read from a JSON object whose
/// simulation keys are those of [`SimConfig`]; the remaining keys are listed
/// below and all optional.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub sim: SimConfig,
    pub property: PropertySpec,
    pub seeds: usize,
    pub lat_budget: usize,
    /// Record per-advance timings in the outputs. Off by default so that
    /// output files are reproducible byte for byte.
    pub timing: bool,
    pub w_values: Option<Vec<usize>>,
    pub delays: Option<Vec<Seconds>>,
    pub n_values: Option<Vec<usize>>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            sim: SimConfig::default(),
            property: PropertySpec::default(),
            seeds: 10,
            lat_budget: DEFAULT_LAT_BUDGET,
            timing: false,
            w_values: None,
            delays: None,
            n_values: None,
        }
    }
}

const EXPERIMENT_KEYS: [&str; 7] = ["property", "seeds", "lat_budget", "timing", "w_values", "delays", "n_values"];

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut value: serde_json::Value = serde_json::from_str(text)?;
        let obj = value.as_object_mut().ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
        let mut extra = serde_json::Map::new();
        for key in EXPERIMENT_KEYS {
            if let Some(v) = obj.remove(key) {
                extra.insert(key.to_string(), v);
            }
        }
        let sim: SimConfig = serde_json::from_value(serde_json::Value::Object(obj.clone()))?;
        let mut cfg = ExperimentConfig { sim, ..ExperimentConfig::default() };
        let take = |k: &str| extra.get(k).cloned();
        if let Some(v) = take("property") {
            cfg.property = serde_json::from_value(v)?;
        }
        if let Some(v) = take("seeds") {
            cfg.seeds = serde_json::from_value(v)?;
        }
        if let Some(v) = take("lat_budget") {
            cfg.lat_budget = serde_json::from_value(v)?;
        }
        if let Some(v) = take("timing") {
            cfg.timing = serde_json::from_value(v)?;
        }
        if let Some(v) = take("w_values") {
            cfg.w_values = Some(serde_json::from_value(v)?);
        }
        if let Some(v) = take("delays") {
            cfg.delays = Some(serde_json::from_value(v)?);
        }
        if let Some(v) = take("n_values") {
            cfg.n_values = Some(serde_json::from_value(v)?);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        if self.seeds == 0 {
            return Err(Error::Config("seeds must be at least 1".into()));
        }
        self.property.resolve(self.sim.n)?;
        Ok(())
    }
}

/// What one seed of one sweep point produced.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub states: usize,
    pub advances: u64,
    /// Detections of the windowed lattice, Definitely and Possibly.
    pub n_latwin: u64,
    pub n_latwin_possibly: u64,
    /// Windowed detections confirmed by the ground truth over the window span.
    pub n_physical: u64,
    pub n_physical_possibly: u64,
    pub n_lat: u64,
    pub n_lat_possibly: u64,
    pub s_latwin: f64,
    pub s_lat: usize,
    pub baseline_truncated: bool,
    pub max_nodes: usize,
    pub max_grow_candidates: usize,
    pub max_prune_removed: usize,
    pub anchor_repairs: u64,
    pub t_latwin_us: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
struct BaselineOutcome {
    n_lat: u64,
    n_lat_possibly: u64,
    s_lat: usize,
    truncated: bool,
}

fn in_order(deliveries: &[crate::sim::Delivery], n: usize) -> Vec<LocalState> {
    let mut queues = vec![ReorderQueue::new(); n];
    let mut out = Vec::with_capacity(deliveries.len());
    for d in deliveries {
        out.extend(queues[d.state.process].on_receive(d.state.clone()));
    }
    out
}

fn run_baseline(states: &[LocalState], n: usize, prop: &Property, budget: usize) -> Result<BaselineOutcome> {
    let mut base = LatBaseline::new(n, prop.with_modality(Modality::Definitely), budget)?;
    for s in states {
        base.advance(s.clone())?;
        if base.truncated() {
            break;
        }
    }
    Ok(BaselineOutcome {
        n_lat: base.definitely_detections(),
        n_lat_possibly: base.possibly_detections(),
        s_lat: if base.truncated() { budget } else { base.node_count() },
        truncated: base.truncated(),
    })
}

/// True-time span covered by the current windows.
fn window_span(engine: &LatWin, trace: &Trace) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (k, w) in engine.windows().iter().enumerate() {
        if let Some((a, b)) = w.range() {
            lo = lo.min(trace.state(k, a).map_or(lo, |r| r.begin));
            hi = hi.max(trace.state(k, b).map_or(hi, |r| r.end));
        }
    }
    (lo, hi)
}

fn run_latwin(states: &[LocalState], trace: &Trace, w: usize, prop: &Property) -> Result<SeedOutcome> {
    let n = trace.n;
    let def = prop.with_modality(Modality::Definitely);
    let pos = prop.with_modality(Modality::Possibly);
    let mut engine = LatWin::new(n, w)?;
    let (mut cd, mut cp) = (TransitionCounter::default(), TransitionCounter::default());
    let mut out = SeedOutcome::default();
    let mut elapsed = 0.0;
    for s in states {
        let t0 = Instant::now();
        engine.advance(s.clone());
        elapsed += t0.elapsed().as_secs_f64();
        if cd.observe(detect(&def, &engine)?.holds) && ground_truth(trace, &def, window_span(&engine, trace))? {
            out.n_physical += 1;
        }
        if cp.observe(detect(&pos, &engine)?.holds) && ground_truth(trace, &pos, window_span(&engine, trace))? {
            out.n_physical_possibly += 1;
        }
    }
    let st = engine.stats();
    out.n_latwin = cd.count();
    out.n_latwin_possibly = cp.count();
    out.advances = st.advances;
    out.s_latwin = st.mean_nodes();
    out.max_nodes = st.max_nodes;
    out.max_grow_candidates = st.max_grow_candidates;
    out.max_prune_removed = st.max_prune_removed;
    out.anchor_repairs = st.anchor_repairs;
    out.t_latwin_us = if st.advances == 0 { 0.0 } else { elapsed * 1e6 / st.advances as f64 };
    Ok(out)
}

/// Runs the windowed lattice for one configuration and seed. When
/// `baseline_budget` is given the unwindowed baseline runs too.
pub fn run_seed(config: &SimConfig, prop: &Property, baseline_budget: Option<usize>) -> Result<SeedOutcome> {
    let trace = generate(config)?;
    let states = in_order(&deliver(&trace, config), config.n);
    let mut out = run_latwin(&states, &trace, config.w, prop)?;
    out.seed = config.seed;
    out.states = trace.total_states();
    if let Some(budget) = baseline_budget {
        let b = run_baseline(&states, config.n, prop, budget)?;
        out.n_lat = b.n_lat;
        out.n_lat_possibly = b.n_lat_possibly;
        out.s_lat = b.s_lat;
        out.baseline_truncated = b.truncated;
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub sweep: String,
    pub param: f64,
    pub seed_count: usize,
    pub perc_det: f64,
    pub perc_det_std: f64,
    pub perc_s: f64,
    pub perc_s_std: f64,
    pub prob_det: f64,
    pub prob_det_std: f64,
    pub s_latwin: f64,
    pub s_latwin_std: f64,
    /// Mean microseconds per advance; only filled in when timing is on.
    pub t_latwin: Option<f64>,
    pub theta_fit: Option<f64>,
    pub perc_det_possibly: f64,
    pub prob_det_possibly: f64,
    pub n_latwin: u64,
    pub n_lat: u64,
    pub n_physical: u64,
    pub s_lat: f64,
    pub baseline_truncated: bool,
    pub max_nodes: usize,
    pub max_grow_candidates: usize,
    pub max_prune_removed: usize,
    pub anchor_repairs: u64,
    pub mean_states_per_process: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64;
    (m, v.sqrt())
}

fn ratios(seeds: &[SeedOutcome], f: impl Fn(&SeedOutcome) -> (f64, f64)) -> Vec<f64> {
    seeds.iter().map(&f).filter(|&(_, d)| d > 0.0).map(|(a, d)| a / d).collect()
}

/// Averages per-seed outcomes into one row.
pub fn aggregate(sweep: &str, param: f64, n: usize, seeds: &[SeedOutcome], timing: bool) -> MetricsReport {
    let (perc_det, perc_det_std) = mean_std(&ratios(seeds, |s| (s.n_latwin as f64, s.n_lat as f64)));
    let (perc_s, perc_s_std) = mean_std(&ratios(seeds, |s| (s.s_latwin, s.s_lat as f64)));
    let (prob_det, prob_det_std) = mean_std(&ratios(seeds, |s| (s.n_physical as f64, s.n_latwin as f64)));
    let (s_latwin, s_latwin_std) = mean_std(&seeds.iter().map(|s| s.s_latwin).collect::<Vec<_>>());
    let (perc_det_possibly, _) = mean_std(&ratios(seeds, |s| (s.n_latwin_possibly as f64, s.n_lat_possibly as f64)));
    let (prob_det_possibly, _) =
        mean_std(&ratios(seeds, |s| (s.n_physical_possibly as f64, s.n_latwin_possibly as f64)));
    let (t, _) = mean_std(&seeds.iter().map(|s| s.t_latwin_us).collect::<Vec<_>>());
    let (s_lat, _) = mean_std(&seeds.iter().map(|s| s.s_lat as f64).collect::<Vec<_>>());
    MetricsReport {
        sweep: sweep.to_string(),
        param,
        seed_count: seeds.len(),
        perc_det,
        perc_det_std,
        perc_s,
        perc_s_std,
        prob_det,
        prob_det_std,
        s_latwin,
        s_latwin_std,
        t_latwin: timing.then_some(t),
        theta_fit: None,
        perc_det_possibly,
        prob_det_possibly,
        n_latwin: seeds.iter().map(|s| s.n_latwin).sum(),
        n_lat: seeds.iter().map(|s| s.n_lat).sum(),
        n_physical: seeds.iter().map(|s| s.n_physical).sum(),
        s_lat,
        baseline_truncated: seeds.iter().any(|s| s.baseline_truncated),
        max_nodes: seeds.iter().map(|s| s.max_nodes).max().unwrap_or(0),
        max_grow_candidates: seeds.iter().map(|s| s.max_grow_candidates).max().unwrap_or(0),
        max_prune_removed: seeds.iter().map(|s| s.max_prune_removed).max().unwrap_or(0),
        anchor_repairs: seeds.iter().map(|s| s.anchor_repairs).sum(),
        mean_states_per_process: seeds.iter().map(|s| s.states as f64).sum::<f64>()
            / (seeds.len().max(1) * n.max(1)) as f64,
    }
}

fn seed_configs(base: &SimConfig, seeds: usize) -> Vec<SimConfig> {
    (0..seeds as u64).map(|i| SimConfig { seed: base.seed.wrapping_add(i), ..base.clone() }).collect()
}

/// Runs every `(point, seed)` pair in parallel. The baseline, which does not
/// depend on `w`, is shared between points differing only in `w`.
fn run_points(
    sweep: &str,
    points: Vec<(f64, SimConfig)>,
    cfg: &ExperimentConfig,
    with_baseline: bool,
) -> Result<Vec<MetricsReport>> {
    let jobs: Vec<(usize, SimConfig)> = points
        .iter()
        .enumerate()
        .flat_map(|(p, (_, c))| seed_configs(c, cfg.seeds).into_iter().map(move |s| (p, s)))
        .collect();

    let mut baseline_keys: Vec<SimConfig> = Vec::new();
    if with_baseline {
        for (_, c) in &jobs {
            let key = SimConfig { w: 1, ..c.clone() };
            if !baseline_keys.contains(&key) {
                baseline_keys.push(key);
            }
        }
    }
    let baselines: Vec<BaselineOutcome> = baseline_keys
        .par_iter()
        .map(|c| {
            let prop = cfg.property.resolve(c.n)?;
            let trace = generate(c)?;
            let states = in_order(&deliver(&trace, c), c.n);
            run_baseline(&states, c.n, &prop, cfg.lat_budget)
        })
        .collect::<Result<_>>()?;
    let lookup: HashMap<String, &BaselineOutcome> = baseline_keys
        .iter()
        .zip(&baselines)
        .map(|(k, b)| (serde_json::to_string(k).expect("config serializes"), b))
        .collect();

    let outcomes: Vec<(usize, SeedOutcome)> = jobs
        .par_iter()
        .map(|(p, c)| {
            let prop = cfg.property.resolve(c.n)?;
            let mut out = run_seed(c, &prop, None)?;
            if with_baseline {
                let key = serde_json::to_string(&SimConfig { w: 1, ..c.clone() }).expect("config serializes");
                let b = lookup[&key];
                out.n_lat = b.n_lat;
                out.n_lat_possibly = b.n_lat_possibly;
                out.s_lat = b.s_lat;
                out.baseline_truncated = b.truncated;
            }
            Ok((*p, out))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(points.len());
    for (p, (param, c)) in points.iter().enumerate() {
        let seeds: Vec<SeedOutcome> = outcomes.iter().filter(|(q, _)| *q == p).map(|(_, o)| o.clone()).collect();
        rows.push(aggregate(sweep, *param, c.n, &seeds, cfg.timing));
    }
    Ok(rows)
}

fn positive(values: impl IntoIterator<Item = f64>, what: &str) -> Result<()> {
    for v in values {
        if v.is_nan() || v <= 0.0 {
            return Err(Error::Config(format!("{what} values must be positive, got {v}")));
        }
    }
    Ok(())
}

/// perc_det and perc_s for each window size, against the unwindowed baseline.
pub fn run_benefit_sweep(cfg: &ExperimentConfig, w_values: &[usize]) -> Result<Vec<MetricsReport>> {
    if w_values.is_empty() {
        return Err(Error::Config("benefit sweep needs at least one w".into()));
    }
    positive(w_values.iter().map(|&w| w as f64), "w")?;
    let points = w_values.iter().map(|&w| (w as f64, SimConfig { w, ..cfg.sim.clone() })).collect();
    run_points("benefit", points, cfg, true)
}

pub fn run_window_sweep(cfg: &ExperimentConfig, w_values: &[usize]) -> Result<Vec<MetricsReport>> {
    positive(w_values.iter().map(|&w| w as f64), "w")?;
    let points = w_values.iter().map(|&w| (w as f64, SimConfig { w, ..cfg.sim.clone() })).collect();
    run_points("window", points, cfg, true)
}

/// Sweeps the mean delivery and message delay; zero is allowed.
pub fn run_delay_sweep(cfg: &ExperimentConfig, delays: &[Seconds]) -> Result<Vec<MetricsReport>> {
    for d in delays {
        if !(d.0 >= 0.0 && d.0.is_finite()) {
            return Err(Error::Config(format!("delays must be non-negative, got {}", d.0)));
        }
    }
    let points = delays.iter().map(|&d| (d.0, SimConfig { mean_delay: d, ..cfg.sim.clone() })).collect();
    run_points("delay", points, cfg, true)
}

/// Sweeps the number of processes and fits `s_latwin ≈ (θ w)^n`.
pub fn run_n_sweep(cfg: &ExperimentConfig, n_values: &[usize]) -> Result<Vec<MetricsReport>> {
    positive(n_values.iter().map(|&n| n as f64), "n")?;
    let points = n_values.iter().map(|&n| (n as f64, SimConfig { n, ..cfg.sim.clone() })).collect();
    let mut rows = run_points("nprocs", points, cfg, true)?;
    let fit = theta_fit(&rows.iter().map(|r| (r.param as usize, r.s_latwin)).collect::<Vec<_>>(), cfg.sim.w);
    for r in &mut rows {
        r.theta_fit = fit;
    }
    Ok(rows)
}

/// Least-squares fit of `ln S = n ln(θ w)` through the origin.
pub fn theta_fit(points: &[(usize, f64)], w: usize) -> Option<f64> {
    let usable: Vec<(f64, f64)> = points.iter().filter(|(_, s)| *s > 0.0).map(|&(n, s)| (n as f64, s.ln())).collect();
    let den: f64 = usable.iter().map(|(n, _)| n * n).sum();
    if usable.is_empty() || den == 0.0 {
        return None;
    }
    let slope = usable.iter().map(|(n, l)| n * l).sum::<f64>() / den;
    Some(slope.exp() / w as f64)
}

fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.6}")
    }
}

pub fn csv_line(r: &MetricsReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        r.sweep,
        r.param,
        r.seed_count,
        fmt_num(r.perc_det),
        fmt_num(r.perc_s),
        fmt_num(r.prob_det),
        fmt_num(r.s_latwin),
        r.t_latwin.map(fmt_num).unwrap_or_default(),
        r.theta_fit.map(fmt_num).unwrap_or_default(),
    )
}

pub fn write_csv<W: Write>(mut out: W, rows: &[MetricsReport]) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", csv_line(r))?;
    }
    Ok(())
}

/// Summary document written next to the CSV.
#[derive(Clone, Debug, Serialize)]
pub struct Summary<'a> {
    pub sweep: &'a str,
    pub config: &'a ExperimentConfig,
    pub rows: &'a [MetricsReport],
    /// Reference figures for comparison only; not targets.
    pub reference: serde_json::Value,
}

pub fn reference_values(sweep: &str) -> serde_json::Value {
    match sweep {
        "benefit" => {
            serde_json::json!({"perc_det_at_w4": 0.9711, "perc_s_at_w10_below": 0.01, "s_latwin_at_w4": 27.23})
        }
        "delay" => serde_json::json!({"prob_det_min_up_to_5s": 0.85, "s_latwin_at_5s": 30.0, "worst_case_w4_n3": 64}),
        "window" => serde_json::json!({"prob_det_at_w5": 0.99}),
        "nprocs" => serde_json::json!({
            "theta": 0.75,
            "s_latwin_n2_to_n9": [9, 25, 78, 221, 768, 2691, 9799, 34408]
        }),
        _ => serde_json::Value::Null,
    }
}

/// Writes `<sweep>.csv` and `<sweep>.json` into `dir`, creating it if needed.
pub fn emit(dir: &Path, sweep: &str, cfg: &ExperimentConfig, rows: &[MetricsReport]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut csv = Vec::new();
    write_csv(&mut csv, rows)?;
    std::fs::write(dir.join(format!("{sweep}.csv")), csv)?;
    let summary = Summary { sweep, config: cfg, rows, reference: reference_values(sweep) };
    let mut json = serde_json::to_vec_pretty(&summary)?;
    json.push(b'\n');
    std::fs::write(dir.join(format!("{sweep}.json")), json)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ExperimentConfig {
        ExperimentConfig {
            sim: SimConfig { lifetime: Seconds::minutes(40.0), ..SimConfig::default() },
            seeds: 2,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn config_reads_sim_and_sweep_keys() {
        let c = ExperimentConfig::from_json(
            r#"{"n": 2, "mean_delay": "1s", "seeds": 3, "w_values": [1, 2],
                "property": {"name": "both", "locals": ["active"]}}"#,
        )
        .unwrap();
        assert_eq!(c.sim.n, 2);
        assert_eq!(c.sim.mean_delay.0, 1.0);
        assert_eq!(c.seeds, 3);
        assert_eq!(c.w_values, Some(vec![1, 2]));
        assert_eq!(c.property.resolve(2).unwrap().locals, vec!["active", "active"]);
        assert!(ExperimentConfig::from_json(r#"{"nope": 1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"seeds": 0}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"n": 3, "property": {"name": "x", "locals": ["a", "b"]}}"#).is_err());
    }

    #[test]
    fn theta_fit_recovers_exact_power() {
        let pts: Vec<(usize, f64)> = (2..7).map(|n| (n, (0.75f64 * 4.0).powi(n as i32))).collect();
        assert!((theta_fit(&pts, 4).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(theta_fit(&[], 4), None);
    }

    #[test]
    fn empty_sweep_gives_header_only() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
        assert!(run_window_sweep(&quick(), &[]).unwrap().is_empty());
        assert!(run_benefit_sweep(&quick(), &[]).is_err());
    }

    #[test]
    fn sweeps_are_deterministic() {
        let a = run_benefit_sweep(&quick(), &[1, 3]).unwrap();
        let b = run_benefit_sweep(&quick(), &[1, 3]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        assert!(a.iter().all(|r| r.t_latwin.is_none()));
        let mut x = Vec::new();
        let mut y = Vec::new();
        write_csv(&mut x, &a).unwrap();
        write_csv(&mut y, &b).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn single_process_without_asynchrony_is_exact() {
        let cfg = ExperimentConfig {
            sim: SimConfig { n: 1, mean_delay: Seconds(0.0), peer_msg_rate: 0.0, ..quick().sim },
            ..quick()
        };
        let rows = run_delay_sweep(&cfg, &[Seconds(0.0)]).unwrap();
        assert_eq!(rows[0].prob_det, 1.0);
    }
}
