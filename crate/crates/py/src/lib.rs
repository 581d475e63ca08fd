//! Python bindings: local states and clocks, the windowed lattice engine,
//! detection, the simulator and the sweep runners.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use latwin::experiment::{self, ExperimentConfig};
use latwin::sim::{deliver, generate, Seconds};
use latwin::trace::StateRecord;
use latwin::{
    build_full_lattice, concurrent as rs_concurrent, merge as rs_merge, state_happens_before, Cut, CutLattice,
    Modality, Property, Trace, UpdateReport, VectorClock,
};

fn err(e: latwin::Error) -> PyErr {
    match e {
        latwin::Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn modality(name: &str) -> PyResult<Modality> {
    match name {
        "possibly" => Ok(Modality::Possibly),
        "definitely" => Ok(Modality::Definitely),
        other => Err(PyValueError::new_err(format!("unknown modality `{other}`"))),
    }
}

fn indices(c: &Cut) -> Vec<u32> {
    c.indices().to_vec()
}

/// One local state: process, index within it, vector clock and boolean payload.
#[pyclass(name = "LocalState", module = "latwin_py", from_py_object)]
#[derive(Clone)]
struct PyLocalState {
    inner: latwin::LocalState,
}

#[pymethods]
impl PyLocalState {
    #[new]
    #[pyo3(signature = (process, index, clock, payload=None, seq=None))]
    fn new(
        process: usize,
        index: u32,
        clock: Vec<u32>,
        payload: Option<BTreeMap<String, bool>>,
        seq: Option<u64>,
    ) -> PyResult<Self> {
        let mut inner =
            latwin::LocalState::new(process, index, VectorClock::from_components(clock), payload.unwrap_or_default());
        if let Some(s) = seq {
            inner.seq = s;
        }
        inner.validate(inner.clock.len()).map_err(err)?;
        Ok(PyLocalState { inner })
    }

    #[getter]
    fn process(&self) -> usize {
        self.inner.process
    }

    #[getter]
    fn index(&self) -> u32 {
        self.inner.index
    }

    #[getter]
    fn seq(&self) -> u64 {
        self.inner.seq
    }

    #[getter]
    fn clock(&self) -> Vec<u32> {
        self.inner.clock.components().to_vec()
    }

    #[getter]
    fn payload(&self) -> BTreeMap<String, bool> {
        self.inner.payload.clone()
    }

    fn __repr__(&self) -> String {
        format!("LocalState(process={}, index={}, clock={})", self.inner.process, self.inner.index, self.inner.clock)
    }
}

fn report_dict<'py>(py: Python<'py>, r: &UpdateReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("process", r.process)?;
    d.set_item("index", r.index)?;
    d.set_item("added", r.added.iter().map(indices).collect::<Vec<_>>())?;
    d.set_item("removed", r.removed.iter().map(indices).collect::<Vec<_>>())?;
    d.set_item("c_min", r.c_min.as_ref().map(indices))?;
    d.set_item("c_max", r.c_max.as_ref().map(indices))?;
    d.set_item("node_count", r.node_count)?;
    Ok(d)
}

/// The lattice of consistent global states inside sliding windows of size `w`.
#[pyclass(name = "LatWin", module = "latwin_py")]
struct PyLatWin {
    inner: latwin::LatWin,
}

#[pymethods]
impl PyLatWin {
    #[new]
    fn new(n: usize, w: usize) -> PyResult<Self> {
        Ok(PyLatWin { inner: latwin::LatWin::new(n, w).map_err(err)? })
    }

    /// Buffers an arrival; returns one report per state it made deliverable.
    fn receive<'py>(&mut self, py: Python<'py>, state: PyLocalState) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let reports = self.inner.receive(state.inner).map_err(err)?;
        reports.iter().map(|r| report_dict(py, r)).collect()
    }

    fn nodes(&self) -> Vec<Vec<u32>> {
        self.inner.view().nodes.iter().map(indices).collect()
    }

    fn edges(&self) -> Vec<(Vec<u32>, Vec<u32>)> {
        self.inner.view().edges.iter().map(|(a, b)| (indices(a), indices(b))).collect()
    }

    fn c_min(&self) -> Option<Vec<u32>> {
        self.inner.c_min().map(indices)
    }

    fn c_max(&self) -> Option<Vec<u32>> {
        self.inner.c_max().map(indices)
    }

    fn window_ranges(&self) -> Vec<Option<(u32, u32)>> {
        self.inner.window_ranges()
    }

    fn __len__(&self) -> usize {
        self.inner.node_count()
    }

    /// Raises if a structural invariant is broken.
    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(PyRuntimeError::new_err)
    }

    /// Evaluates a conjunctive predicate; `locals` names one payload key per
    /// process, or a single key for all of them.
    #[pyo3(signature = (locals, modality="definitely"))]
    fn detect(&self, locals: Vec<String>, modality: &str) -> PyResult<bool> {
        let prop = property(locals, modality, self.inner.n())?;
        Ok(latwin::detect(&prop, &self.inner).map_err(err)?.holds)
    }

    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let st = self.inner.stats();
        let d = PyDict::new(py);
        d.set_item("advances", st.advances)?;
        d.set_item("node_count", st.node_count)?;
        d.set_item("max_nodes", st.max_nodes)?;
        d.set_item("mean_nodes", st.mean_nodes())?;
        d.set_item("max_grow_candidates", st.max_grow_candidates)?;
        d.set_item("max_prune_removed", st.max_prune_removed)?;
        d.set_item("duplicates", st.duplicates)?;
        Ok(d)
    }
}

fn property(locals: Vec<String>, modality_name: &str, n: usize) -> PyResult<Property> {
    let locals = if locals.len() == 1 { vec![locals[0].clone(); n] } else { locals };
    Ok(Property { name: "query".into(), modality: modality(modality_name)?, locals })
}

#[pyfunction]
fn merge(a: Vec<u32>, b: Vec<u32>) -> PyResult<Vec<u32>> {
    let m = rs_merge(&VectorClock::from_components(a), &VectorClock::from_components(b)).map_err(err)?;
    Ok(m.components().to_vec())
}

#[pyfunction]
fn happens_before(a: PyRef<'_, PyLocalState>, b: PyRef<'_, PyLocalState>) -> bool {
    state_happens_before(&a.inner, &b.inner)
}

#[pyfunction]
fn concurrent(a: PyRef<'_, PyLocalState>, b: PyRef<'_, PyLocalState>) -> PyResult<bool> {
    rs_concurrent(&a.inner, &b.inner).map_err(err)
}

/// Runs the simulator; returns the states in arrival order.
#[pyfunction]
#[pyo3(signature = (config_json="{}"))]
fn simulate(config_json: &str) -> PyResult<Vec<PyLocalState>> {
    let cfg = ExperimentConfig::from_json(config_json).map_err(err)?;
    let trace = generate(&cfg.sim).map_err(err)?;
    Ok(deliver(&trace, &cfg.sim).into_iter().map(|d| PyLocalState { inner: d.state }).collect())
}

/// Every consistent global state of a complete set of states.
#[pyfunction]
fn full_lattice(states: Vec<PyLocalState>) -> PyResult<Vec<Vec<u32>>> {
    let n = states.first().map_or(0, |s| s.inner.clock.len());
    let trace = Trace::from_states(n, states.into_iter().map(|s| StateRecord { state: s.inner, begin: 0.0, end: 0.0 }))
        .map_err(err)?;
    Ok(build_full_lattice(&trace).map_err(err)?.nodes().iter().map(indices).collect())
}

/// Runs a sweep (`benefit`, `window`, `delay` or `nprocs`) and returns the CSV text.
#[pyfunction]
#[pyo3(signature = (kind, values, config_json="{}"))]
fn run_sweep(kind: &str, values: Vec<f64>, config_json: &str) -> PyResult<String> {
    let cfg = ExperimentConfig::from_json(config_json).map_err(err)?;
    let ints = || values.iter().map(|&v| v as usize).collect::<Vec<_>>();
    let rows = match kind {
        "benefit" => experiment::run_benefit_sweep(&cfg, &ints()),
        "window" => experiment::run_window_sweep(&cfg, &ints()),
        "delay" => experiment::run_delay_sweep(&cfg, &values.iter().map(|&v| Seconds(v)).collect::<Vec<_>>()),
        "nprocs" => experiment::run_n_sweep(&cfg, &ints()),
        other => return Err(PyValueError::new_err(format!("unknown sweep `{other}`"))),
    }
    .map_err(err)?;
    let mut buf = Vec::new();
    experiment::write_csv(&mut buf, &rows).map_err(err)?;
    String::from_utf8(buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Randomized engine-versus-brute-force suite; returns total checks and violations.
#[pyfunction]
#[pyo3(signature = (seeds=50, ns=vec![2, 3], ws=vec![1, 2, 3, 4], max_events=10, first_seed=1))]
fn oracle_check(seeds: usize, ns: Vec<usize>, ws: Vec<usize>, max_events: usize, first_seed: u64) -> (u64, u64) {
    let reports = latwin::oracle::run_suite(first_seed, seeds, &ns, &ws, max_events);
    let checked = reports.iter().flat_map(|r| r.checks.values()).map(|t| t.checked).sum();
    let violations = reports.iter().map(|r| r.violations()).sum();
    (checked, violations)
}

/// Adds every class and function to `m`; the extension module entry point
/// calls this, and embedders can use it to build the module by hand.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLocalState>()?;
    m.add_class::<PyLatWin>()?;
    m.add_function(wrap_pyfunction!(merge, m)?)?;
    m.add_function(wrap_pyfunction!(happens_before, m)?)?;
    m.add_function(wrap_pyfunction!(concurrent, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(full_lattice, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_check, m)?)?;
    Ok(())
}

#[pymodule]
fn latwin_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
