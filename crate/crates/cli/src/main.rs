use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use latwin::experiment::{self, ExperimentConfig, MetricsReport};
use latwin::oracle::{self, Check};
use latwin::sim::{deliver, generate, Seconds};
use latwin::{detect, read_jsonl, write_jsonl, Cut, CutLattice, LatWin, Modality, TraceRecord};

#[derive(Parser, Debug)]
#[command(name = "latwin", version, about = "Sliding-window lattice experiments, trace replay and self-checks")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Experiment configuration (JSON): simulation keys plus optional sweep keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed; seed i of a sweep point uses seed + i.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    /// Seeds per sweep point (randomized runs per (n, w) for oracle-check).
    #[arg(long, global = true)]
    seeds: Option<usize>,
    /// Node budget for the unwindowed baseline lattice.
    #[arg(long, global = true)]
    lat_budget: Option<usize>,
    /// Include per-advance timings (makes outputs machine-dependent).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Detection and space ratios against the unwindowed baseline, per window size.
    Benefit {
        #[arg(long = "w", value_delimiter = ',')]
        w_values: Option<Vec<usize>>,
    },
    /// Metrics as the mean delay grows.
    Delay {
        #[arg(long, value_delimiter = ',')]
        delays: Option<Vec<Seconds>>,
    },
    /// Metrics as the window grows.
    Window {
        #[arg(long = "w", value_delimiter = ',')]
        w_values: Option<Vec<usize>>,
    },
    /// Metrics as the number of processes grows, with a fit of the growth rate.
    Nprocs {
        #[arg(long = "n", value_delimiter = ',')]
        n_values: Option<Vec<usize>>,
    },
    /// Simulates one run and writes its states, in arrival order, as JSON lines.
    Simulate {
        #[arg(long, default_value = "trace.jsonl")]
        output: PathBuf,
    },
    /// Feeds a JSON-lines trace through the engine.
    Replay {
        input: PathBuf,
        /// Window size (defaults to the config's).
        #[arg(long)]
        w: Option<usize>,
        /// Also write every update report as JSON lines.
        #[arg(long)]
        events_log: Option<PathBuf>,
    },
    /// Randomized engine-versus-brute-force equivalence suite.
    OracleCheck {
        #[arg(long = "n", value_delimiter = ',', default_value = "2,3")]
        n_values: Vec<usize>,
        #[arg(long = "w", value_delimiter = ',', default_value = "1,2,3,4")]
        w_values: Vec<usize>,
        /// Upper bound on events per process.
        #[arg(long, default_value_t = 25)]
        max_events: usize,
    },
}

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

fn load_config(common: &Common) -> AnyResult<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::from_path(p).map_err(|e| format!("reading {}: {e}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.sim.seed = s;
    }
    if let Some(s) = common.seeds {
        cfg.seeds = s;
    }
    if let Some(b) = common.lat_budget {
        cfg.lat_budget = b;
    }
    cfg.timing |= common.timing;
    cfg.validate()?;
    Ok(cfg)
}

fn emit(common: &Common, sweep: &str, cfg: &ExperimentConfig, rows: &[MetricsReport]) -> AnyResult<()> {
    experiment::emit(&common.out, sweep, cfg, rows).map_err(|e| format!("writing to {}: {e}", common.out.display()))?;
    let mut stdout = std::io::stdout().lock();
    experiment::write_csv(&mut stdout, rows)?;
    Ok(())
}

fn create(path: &Path) -> AnyResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| format!("creating {}: {e}", dir.display()))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| format!("creating {}: {e}", path.display()))?))
}

fn cut_field(c: &Option<Cut>) -> String {
    c.as_ref().map(|c| c.indices().iter().map(u32::to_string).collect::<Vec<_>>().join(";")).unwrap_or_default()
}

fn replay(
    common: &Common,
    cfg: &ExperimentConfig,
    input: &Path,
    w: Option<usize>,
    log: Option<&Path>,
) -> AnyResult<()> {
    let file = File::open(input).map_err(|e| format!("opening {}: {e}", input.display()))?;
    let records = read_jsonl(BufReader::new(file))?;
    let Some(first) = records.first() else {
        return Err(format!("{} holds no records", input.display()).into());
    };
    let n = first.clock.len();
    let w = w.unwrap_or(cfg.sim.w);
    let prop = cfg.property.resolve(n)?;
    let def = prop.with_modality(Modality::Definitely);
    let pos = prop.with_modality(Modality::Possibly);
    let mut engine = LatWin::new(n, w)?;
    let mut log = log.map(create).transpose()?;
    std::fs::create_dir_all(&common.out).map_err(|e| format!("creating {}: {e}", common.out.display()))?;
    let csv_path = common.out.join("replay.csv");
    let mut csv = create(&csv_path)?;
    writeln!(csv, "step,process,index,added,removed,node_count,c_min,c_max,definitely,possibly")?;
    let (mut step, mut det_def, mut det_pos) = (0u64, 0u64, 0u64);
    let (mut last_def, mut last_pos) = (false, false);
    for rec in &records {
        for report in engine.receive(rec.to_local_state())? {
            step += 1;
            let d = detect(&def, &engine)?.holds;
            let p = detect(&pos, &engine)?.holds;
            det_def += u64::from(d && !last_def);
            det_pos += u64::from(p && !last_pos);
            (last_def, last_pos) = (d, p);
            writeln!(
                csv,
                "{step},{},{},{},{},{},{},{},{d},{p}",
                report.process,
                report.index,
                report.added.len(),
                report.removed.len(),
                report.node_count,
                cut_field(&report.c_min),
                cut_field(&report.c_max),
            )?;
            if let Some(out) = log.as_mut() {
                serde_json::to_writer(&mut *out, &report)?;
                out.write_all(b"\n")?;
            }
        }
    }
    csv.flush()?;
    if let Some(mut out) = log {
        out.flush()?;
    }
    let st = engine.stats();
    println!(
        "{}",
        serde_json::json!({
            "records": records.len(),
            "advances": st.advances,
            "duplicates": st.duplicates,
            "buffered": records.len() as u64 - st.advances - st.duplicates,
            "max_nodes": st.max_nodes,
            "mean_nodes": st.mean_nodes(),
            "final_nodes": engine.node_count(),
            "detections_definitely": det_def,
            "detections_possibly": det_pos,
            "csv": csv_path,
        })
    );
    Ok(())
}

fn oracle_check(
    common: &Common,
    seed: u64,
    seeds: usize,
    ns: &[usize],
    ws: &[usize],
    max_events: usize,
) -> AnyResult<bool> {
    if ns.iter().chain(ws).any(|&x| x == 0) {
        return Err("n and w must be positive".into());
    }
    let reports = oracle::run_suite(seed, seeds, ns, ws, max_events);
    std::fs::create_dir_all(&common.out).map_err(|e| format!("creating {}: {e}", common.out.display()))?;
    let path = common.out.join("oracle-check.csv");
    let mut csv = create(&path)?;
    writeln!(csv, "n,w,check,checked,violations")?;
    let mut all_ok = true;
    for r in &reports {
        let mut line = format!("n={} w={} runs={} advances={}:", r.n, r.w, r.runs, r.advances);
        for c in Check::ALL {
            let t = r.tally(c);
            let name = serde_json::to_value(c)?.as_str().unwrap_or_default().to_string();
            writeln!(csv, "{},{},{name},{},{}", r.n, r.w, t.checked, t.violations)?;
            line.push_str(&format!(" {name} {}/{}", t.checked - t.violations, t.checked));
            for e in &t.examples {
                eprintln!("  {name} violation: {e}");
            }
            all_ok &= t.violations == 0;
        }
        println!("{line}");
    }
    csv.flush()?;
    println!("oracle-check: {}", if all_ok { "PASS" } else { "FAIL" });
    Ok(all_ok)
}

fn run(cli: Cli) -> AnyResult<bool> {
    let common = &cli.common;
    let cfg = load_config(common)?;
    if matches!(
        cli.command,
        Command::Benefit { .. } | Command::Window { .. } | Command::Delay { .. } | Command::Nprocs { .. }
    ) {
        std::fs::create_dir_all(&common.out).map_err(|e| format!("creating {}: {e}", common.out.display()))?;
    }
    match cli.command {
        Command::Benefit { w_values } => {
            let ws = w_values.or(cfg.w_values.clone()).unwrap_or_else(|| (1..=10).collect());
            emit(common, "benefit", &cfg, &experiment::run_benefit_sweep(&cfg, &ws)?)?;
        }
        Command::Window { w_values } => {
            let ws = w_values.or(cfg.w_values.clone()).unwrap_or_else(|| (1..=10).collect());
            emit(common, "window", &cfg, &experiment::run_window_sweep(&cfg, &ws)?)?;
        }
        Command::Delay { delays } => {
            let ds = delays
                .or(cfg.delays.clone())
                .unwrap_or_else(|| [0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0].map(Seconds).to_vec());
            emit(common, "delay", &cfg, &experiment::run_delay_sweep(&cfg, &ds)?)?;
        }
        Command::Nprocs { n_values } => {
            let ns = n_values.or(cfg.n_values.clone()).unwrap_or_else(|| (2..=6).collect());
            emit(common, "nprocs", &cfg, &experiment::run_n_sweep(&cfg, &ns)?)?;
        }
        Command::Simulate { output } => {
            let trace = generate(&cfg.sim)?;
            let records: Vec<TraceRecord> = deliver(&trace, &cfg.sim)
                .iter()
                .map(|d| {
                    let mut r =
                        TraceRecord::from_state(trace.state(d.state.process, d.state.index).expect("delivered state"));
                    r.seq = d.state.seq;
                    r
                })
                .collect();
            let mut out = create(&output)?;
            write_jsonl(&mut out, &records)?;
            out.flush()?;
            println!("wrote {} states of {} processes to {}", records.len(), trace.n, output.display());
        }
        Command::Replay { input, w, events_log } => replay(common, &cfg, &input, w, events_log.as_deref())?,
        Command::OracleCheck { n_values, w_values, max_events } => {
            let seeds = common.seeds.unwrap_or(500);
            return oracle_check(common, cfg.sim.seed, seeds, &n_values, &w_values, max_events);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
