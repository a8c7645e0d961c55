//! Python bindings for the `difflb` simulator.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use difflb::diffusion::{self, BetaChoice, InitKind, LoadState, Realize, Rounding, Scheme, SchemeConfig, Simulator};
use difflb::harness::verify::{self, Suite, VerifyOptions};
use difflb::harness::GraphSpec;
use difflb::metrics::RoundRecord;
use difflb::theory::{self, NegativeLoadVariant, UpsilonOptions};
use difflb::{render, spectral};

fn to_py(e: difflb::Error) -> PyErr {
    match e {
        difflb::Error::Io(e) => PyIOError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = difflb::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

#[pyclass(name = "Graph", module = "pydifflb", frozen)]
pub struct PyGraph {
    inner: difflb::Graph,
}

#[pymethods]
impl PyGraph {
    /// Build from a compact spec such as `torus2d:100x100` or `regular:1000,19`.
    #[staticmethod]
    #[pyo3(signature = (spec, seed = 0))]
    fn from_spec(spec: &str, seed: u64) -> PyResult<Self> {
        let spec: GraphSpec = parse(spec)?;
        Ok(PyGraph {
            inner: spec.build(seed).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_edges(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(PyGraph {
            inner: difflb::Graph::from_edges(n, &edges).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn torus2d(width: usize, height: usize) -> PyResult<Self> {
        Self::wrap(difflb::Graph::torus2d(width, height))
    }

    #[staticmethod]
    fn hypercube(dimension: u32) -> PyResult<Self> {
        Self::wrap(difflb::Graph::hypercube(dimension))
    }

    #[staticmethod]
    fn cycle(n: usize) -> PyResult<Self> {
        Self::wrap(difflb::Graph::cycle(n))
    }

    #[staticmethod]
    fn path(n: usize) -> PyResult<Self> {
        Self::wrap(difflb::Graph::path(n))
    }

    #[staticmethod]
    fn complete(n: usize) -> PyResult<Self> {
        Self::wrap(difflb::Graph::complete(n))
    }

    #[staticmethod]
    fn random_regular(n: usize, d: usize, seed: u64) -> PyResult<Self> {
        Self::wrap(difflb::Graph::random_regular(n, d, seed))
    }

    #[staticmethod]
    fn random_geometric(n: usize, radius: f64, seed: u64) -> PyResult<Self> {
        Self::wrap(difflb::Graph::random_geometric(n, radius, seed))
    }

    /// Copy of this graph with the given node speeds.
    fn with_speeds(&self, speeds: Vec<f64>) -> PyResult<Self> {
        Self::wrap(self.inner.clone().with_speeds(speeds))
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    #[getter]
    fn max_degree(&self) -> usize {
        self.inner.max_degree()
    }

    #[getter]
    fn speeds(&self) -> Vec<f64> {
        self.inner.speeds().to_vec()
    }

    fn neighbors(&self, i: usize) -> PyResult<Vec<usize>> {
        if i >= self.inner.n() {
            return Err(to_py(difflb::Error::NodeOutOfRange { node: i, n: self.inner.n() }));
        }
        Ok(self.inner.neighbors(i).collect())
    }

    /// Undirected edges `(i, j)` with `i < j`.
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().map(|(i, j, _)| (i, j)).collect()
    }

    /// Dense diffusion matrix as a list of rows.
    fn diffusion_matrix(&self) -> Vec<Vec<f64>> {
        let m = self.inner.diffusion_matrix();
        m.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, edges={})", self.inner.n(), self.inner.edge_count())
    }
}

impl PyGraph {
    fn wrap(g: difflb::Result<difflb::Graph>) -> PyResult<Self> {
        Ok(PyGraph { inner: g.map_err(to_py)? })
    }
}

enum State {
    Discrete(LoadState<i64>),
    Continuous(LoadState<f64>),
}

/// Load balancing process that can be advanced a few rounds at a time.
#[pyclass(name = "Simulator", module = "pydifflb")]
pub struct PySimulator {
    graph: difflb::Graph,
    config: SchemeConfig,
    beta: f64,
    state: State,
}

fn record_dict<'py>(py: Python<'py>, r: &RoundRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("round", r.round)?;
    d.set_item("total_load", r.total_load)?;
    d.set_item("max_above_avg", r.max_above_avg)?;
    d.set_item("max_local_diff", r.max_local_diff)?;
    d.set_item("potential_over_n", r.potential_over_n)?;
    d.set_item("min_load", r.min_load)?;
    d.set_item("min_transient", r.min_transient)?;
    Ok(d)
}

fn advance<L: Realize>(
    graph: &difflb::Graph,
    config: &SchemeConfig,
    beta: f64,
    state: LoadState<L>,
    rounds: u64,
) -> difflb::Result<(LoadState<L>, Vec<RoundRecord>)> {
    let cfg = SchemeConfig {
        rounds: state.round + rounds,
        ..config.clone()
    };
    let mut sim = Simulator::from_state(graph, cfg, beta, state)?;
    let records = sim.run_with(|_, _| Ok(()))?;
    Ok((sim.into_state(), records))
}

#[pymethods]
impl PySimulator {
    /// `init` is either a list of loads or a spec such as `corner:1000`.
    /// Rounding `none` gives a continuous process.
    #[new]
    #[pyo3(signature = (graph, scheme = "sos", beta = None, rounding = "randomized", seed = 0, switch_at = None, init = None))]
    fn new(
        graph: &PyGraph,
        scheme: &str,
        beta: Option<f64>,
        rounding: &str,
        seed: u64,
        switch_at: Option<u64>,
        init: Option<&Bound<'_, PyAny>>,
    ) -> PyResult<Self> {
        let graph = graph.inner.clone();
        let config = SchemeConfig {
            scheme: parse(scheme)?,
            beta: beta.map_or(BetaChoice::Auto, BetaChoice::Value),
            rounding: parse(rounding)?,
            switch_at,
            rounds: 0,
            seed,
        };
        let x0 = match init {
            None => diffusion::initial_load(&InitKind::Corner(1000.0), &graph).map_err(to_py)?,
            Some(v) => match v.extract::<String>() {
                Ok(s) => diffusion::initial_load(&parse(&s)?, &graph).map_err(to_py)?,
                Err(_) => v.extract::<Vec<f64>>()?,
            },
        };
        let beta = config.resolve_beta(&graph).map_err(to_py)?;
        let state = if config.rounding == Rounding::None {
            let sim = Simulator::with_beta(&graph, config.clone(), beta, x0).map_err(to_py)?;
            State::Continuous(sim.into_state())
        } else {
            let x0 = difflb::load::convert::<i64>(&x0)
                .ok_or_else(|| PyValueError::new_err("discrete processes need integral initial loads"))?;
            let sim = Simulator::with_beta(&graph, config.clone(), beta, x0).map_err(to_py)?;
            State::Discrete(sim.into_state())
        };
        Ok(PySimulator {
            graph,
            config,
            beta,
            state,
        })
    }

    /// Run `rounds` more rounds and return their metric records.
    #[pyo3(signature = (rounds = 1))]
    fn step<'py>(&mut self, py: Python<'py>, rounds: u64) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let placeholder = State::Continuous(LoadState {
            x: Vec::new(),
            y_prev: Vec::new(),
            round: 0,
        });
        let records = match std::mem::replace(&mut self.state, placeholder) {
            State::Discrete(s) => {
                let (s, r) = advance(&self.graph, &self.config, self.beta, s, rounds).map_err(to_py)?;
                self.state = State::Discrete(s);
                r
            }
            State::Continuous(s) => {
                let (s, r) = advance(&self.graph, &self.config, self.beta, s, rounds).map_err(to_py)?;
                self.state = State::Continuous(s);
                r
            }
        };
        records.iter().map(|r| record_dict(py, r)).collect()
    }

    #[getter]
    fn loads(&self) -> Vec<f64> {
        match &self.state {
            State::Discrete(s) => s.x.iter().map(|&v| v as f64).collect(),
            State::Continuous(s) => s.x.clone(),
        }
    }

    #[getter]
    fn round(&self) -> u64 {
        match &self.state {
            State::Discrete(s) => s.round,
            State::Continuous(s) => s.round,
        }
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.beta
    }

    #[getter]
    fn discrete(&self) -> bool {
        matches!(self.state, State::Discrete(_))
    }
}

/// Second largest eigenvalue magnitude of the diffusion matrix and how it
/// was obtained.
#[pyfunction]
fn lambda2(graph: &PyGraph) -> PyResult<(f64, String)> {
    let s = spectral::lambda2(&graph.inner).map_err(to_py)?;
    Ok((s.lambda, s.source.to_string()))
}

#[pyfunction]
fn beta_opt(lambda: f64) -> PyResult<f64> {
    spectral::beta_opt(lambda).map_err(to_py)
}

/// Eigenvalues sorted by decreasing magnitude.
#[pyfunction]
fn eigenvalues(graph: &PyGraph) -> PyResult<Vec<f64>> {
    Ok(spectral::eigenbasis(&graph.inner).map_err(to_py)?.values().to_vec())
}

/// Coefficients of `x` in the eigenbasis, in eigenvalue order.
#[pyfunction]
fn coefficients(graph: &PyGraph, x: Vec<f64>) -> PyResult<Vec<f64>> {
    let basis = spectral::eigenbasis(&graph.inner).map_err(to_py)?;
    basis.coefficients(&x).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (graph, scheme = "fos", beta = None))]
fn upsilon(graph: &PyGraph, scheme: &str, beta: Option<f64>) -> PyResult<f64> {
    let scheme: Scheme = parse(scheme)?;
    let lambda = spectral::lambda2(&graph.inner).map_err(to_py)?.lambda;
    let beta = match beta {
        Some(b) => b,
        None => spectral::beta_opt(lambda).map_err(to_py)?,
    };
    let report = theory::upsilon(&graph.inner, scheme, beta, UpsilonOptions::for_lambda(lambda)).map_err(to_py)?;
    Ok(report.value)
}

/// Lower load bound; `variant` is `end`, `transient` or `transient-discrete`.
#[pyfunction]
#[pyo3(signature = (n, delta0, lambda, variant = "end", max_degree = 0))]
fn negative_load_floor(n: usize, delta0: f64, lambda: f64, variant: &str, max_degree: usize) -> PyResult<f64> {
    let v = match variant {
        "end" => NegativeLoadVariant::EndOfRound,
        "transient" => NegativeLoadVariant::TransientContinuous,
        "transient-discrete" => NegativeLoadVariant::TransientDiscrete { max_degree },
        _ => return Err(PyValueError::new_err(format!("unknown variant '{variant}'"))),
    };
    theory::negative_load_floor(n, delta0, lambda, v).map_err(to_py)
}

/// Run a verification suite; returns `(check, passed, detail)` tuples.
#[pyfunction]
#[pyo3(signature = (suite = "all", seeds = 20, instances = 50))]
fn verify_suite(suite: &str, seeds: u64, instances: usize) -> PyResult<Vec<(String, bool, String)>> {
    let suite = <Suite as clap::ValueEnum>::from_str(suite, false).map_err(PyValueError::new_err)?;
    let opts = VerifyOptions {
        seeds,
        instances,
        ..VerifyOptions::default()
    };
    let lines = verify::run_suite(suite, &opts).map_err(to_py)?;
    Ok(lines
        .into_iter()
        .map(|l| (format!("{}/{}", l.suite, l.name), l.passed, l.detail))
        .collect())
}

/// Binary PGM of a torus load vector; `mode` is `adaptive` or `threshold:C`.
#[pyfunction]
#[pyo3(signature = (x, width, height, mode = "adaptive"))]
fn render_pgm<'py>(
    py: Python<'py>,
    x: Vec<f64>,
    width: usize,
    height: usize,
    mode: &str,
) -> PyResult<Bound<'py, PyBytes>> {
    let frame = render::render(&x, width, height, parse(mode)?).map_err(to_py)?;
    let bytes = render::encode_pgm(&frame).map_err(to_py)?;
    Ok(PyBytes::new(py, &bytes))
}

#[pymodule]
fn pydifflb(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PySimulator>()?;
    m.add_function(wrap_pyfunction!(lambda2, m)?)?;
    m.add_function(wrap_pyfunction!(beta_opt, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(upsilon, m)?)?;
    m.add_function(wrap_pyfunction!(negative_load_floor, m)?)?;
    m.add_function(wrap_pyfunction!(verify_suite, m)?)?;
    m.add_function(wrap_pyfunction!(render_pgm, m)?)?;
    Ok(())
}
