//! Python bindings for `epibound`.
//!
//! Graphs are wrapped in an immutable `Graph` class; seed sets are plain
//! lists of vertex ids. Library errors surface as `ValueError`, except cap
//! violations, which raise `CapExceededError` (a `ValueError` subclass).

use epibound::bounds::{self, MonteCarloOptions, ReportOptions};
use epibound::generators::{self, GwConfig, RegularSampling};
use epibound::graph::{self, SeedSet};
use epibound::rng::stream_rng;
use epibound::sim::{EpidemicParams, Method};
use epibound::{io, oracle, sim, Error};
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

create_exception!(pyepibound, CapExceededError, PyValueError);

fn to_py_err(err: Error) -> PyErr {
    match err {
        Error::CapExceeded { .. } => CapExceededError::new_err(err.to_string()),
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait IntoPyResult<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPyResult<T> for epibound::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py_err)
    }
}

/// Recursively converts JSON into Python objects.
fn json_to_py(py: Python<'_>, value: &serde_json::Value) -> PyResult<Py<PyAny>> {
    use serde_json::Value;
    Ok(match value {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.into_pyobject(py)?.into_any().unbind(),
            (None, Some(i)) => i.into_pyobject(py)?.into_any().unbind(),
            _ => n
                .as_f64()
                .unwrap_or(f64::NAN)
                .into_pyobject(py)?
                .into_any()
                .unbind(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any().unbind()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, v) in map {
                dict.set_item(k, json_to_py(py, v)?)?;
            }
            dict.into_any().unbind()
        }
    })
}

fn serialize<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let json = serde_json::to_value(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &json)
}

/// Simple undirected graph on vertices `0..n`.
#[pyclass(frozen, module = "pyepibound")]
struct Graph {
    inner: graph::Graph,
}

impl Graph {
    fn seeds(&self, ids: Vec<usize>) -> PyResult<SeedSet> {
        SeedSet::new(ids, self.inner.n()).py()
    }
}

fn wrap(inner: graph::Graph) -> Graph {
    Graph { inner }
}

#[pymethods]
impl Graph {
    #[new]
    #[pyo3(signature = (n, edges = Vec::new()))]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(wrap(graph::Graph::from_edges(n, &edges).py()?))
    }

    /// Parses the `n m` header + edge-line text format.
    #[staticmethod]
    fn from_edge_list(text: &str) -> PyResult<Self> {
        Ok(wrap(io::read_edge_list(text.as_bytes()).py()?))
    }

    fn to_edge_list(&self) -> String {
        io::write_edge_list(&self.inner)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().to_vec()
    }

    fn neighbors(&self, v: usize) -> PyResult<Vec<usize>> {
        self.check(v)?;
        Ok(self.inner.neighbors(v).to_vec())
    }

    fn degree(&self, v: usize) -> PyResult<usize> {
        self.check(v)?;
        Ok(self.inner.degree(v))
    }

    fn max_degree(&self) -> usize {
        self.inner.max_degree()
    }

    fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.inner.n() && v < self.inner.n() && self.inner.has_edge(u, v)
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    /// Returns `(graph, root)` where `root` is a new vertex joined to every seed.
    fn with_virtual_root(&self, seeds: Vec<usize>) -> PyResult<(Graph, usize)> {
        let seeds = self.seeds(seeds)?;
        let (g, root) = self.inner.with_virtual_root(&seeds);
        Ok((wrap(g), root))
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, m={})", self.inner.n(), self.inner.m())
    }
}

impl Graph {
    fn check(&self, v: usize) -> PyResult<()> {
        if v < self.inner.n() {
            Ok(())
        } else {
            Err(PyValueError::new_err(format!(
                "vertex {v} out of range for a graph with {} vertices",
                self.inner.n()
            )))
        }
    }
}

#[pyfunction]
fn cycle(n: usize) -> PyResult<Graph> {
    Ok(wrap(generators::gen_cycle(n).py()?))
}

#[pyfunction]
fn path(n: usize) -> Graph {
    wrap(generators::gen_path(n))
}

#[pyfunction]
fn complete(n: usize) -> Graph {
    wrap(generators::gen_complete(n))
}

#[pyfunction]
fn hypercube(d: usize) -> PyResult<Graph> {
    Ok(wrap(generators::gen_hypercube(d).py()?))
}

#[pyfunction]
fn rary_tree(r: usize, height: usize) -> PyResult<Graph> {
    Ok(wrap(generators::gen_rary_tree(r, height).py()?))
}

#[pyfunction]
#[pyo3(signature = (n, chords, seed = 0))]
fn generalized_cycle(n: usize, chords: usize, seed: u64) -> PyResult<Graph> {
    let mut rng = stream_rng(seed, 0);
    Ok(wrap(
        generators::gen_generalized_cycle(n, chords, &mut rng).py()?,
    ))
}

#[pyfunction]
#[pyo3(signature = (n, r, seed = 0, erase_collisions = false))]
fn random_regular(n: usize, r: usize, seed: u64, erase_collisions: bool) -> PyResult<Graph> {
    let sampling = if erase_collisions {
        RegularSampling::EraseCollisions
    } else {
        RegularSampling::Exact
    };
    let mut rng = stream_rng(seed, 0);
    Ok(wrap(
        generators::gen_random_regular(n, r, &mut rng, sampling).py()?,
    ))
}

/// Samples a Galton-Watson tree rooted at vertex 0; returns `(graph, truncated)`.
#[pyfunction]
#[pyo3(signature = (offspring_pmf, seed = 0, depth_cap = GwConfig::DEFAULT_DEPTH_CAP, size_cap = GwConfig::DEFAULT_SIZE_CAP))]
fn gw_tree(
    offspring_pmf: Vec<f64>,
    seed: u64,
    depth_cap: usize,
    size_cap: usize,
) -> PyResult<(Graph, bool)> {
    let cfg = GwConfig::new(offspring_pmf, depth_cap, size_cap).py()?;
    let tree = generators::gen_gw_tree(&cfg, &mut stream_rng(seed, 0));
    Ok((wrap(tree.graph), tree.truncated))
}

/// Hop distance from the nearest seed, `None` for unreachable vertices.
#[pyfunction]
fn bfs_distances(g: &Graph, seeds: Vec<usize>) -> PyResult<Vec<Option<usize>>> {
    let seeds = g.seeds(seeds)?;
    Ok(graph::bfs_distances(&g.inner, &seeds).as_slice().to_vec())
}

#[pyfunction]
fn tree_like_radius(g: &Graph, center: usize, d_max: usize) -> PyResult<usize> {
    g.check(center)?;
    Ok(graph::tree_like_radius(&g.inner, center, d_max))
}

#[pyfunction]
fn lower_bound(g: &Graph, seeds: Vec<usize>, beta: f64) -> PyResult<f64> {
    bounds::lower_bound(&g.inner, &g.seeds(seeds)?, beta).py()
}

/// `k / (1 - beta * max_degree)`, or `None` when `beta * max_degree >= 1`.
#[pyfunction]
fn upper_bound_degree(g: &Graph, k: usize, beta: f64) -> PyResult<Option<f64>> {
    bounds::upper_bound_degree(&g.inner, k, beta).py()
}

#[pyfunction]
fn exact_mean(g: &Graph, seeds: Vec<usize>, beta: f64) -> PyResult<f64> {
    oracle::exact_mean_bruteforce(&g.inner, &g.seeds(seeds)?, beta).py()
}

/// Distribution of the outbreak size, indexed by size. With `process=True`
/// the time-stepped process is enumerated instead of edge percolation.
#[pyfunction]
#[pyo3(signature = (g, seeds, beta, process = false))]
fn exact_pmf(g: &Graph, seeds: Vec<usize>, beta: f64, process: bool) -> PyResult<Vec<f64>> {
    let seeds = g.seeds(seeds)?;
    if process {
        oracle::exact_process_distribution(&g.inner, &seeds, beta).py()
    } else {
        oracle::exact_distribution_bruteforce(&g.inner, &seeds, beta).py()
    }
}

#[pyfunction]
fn exact_mean_tree(g: &Graph, seeds: Vec<usize>, beta: f64) -> PyResult<f64> {
    oracle::exact_mean_tree(&g.inner, &g.seeds(seeds)?, beta).py()
}

fn parse_method(method: &str) -> PyResult<Method> {
    method.parse().py()
}

/// Monte Carlo estimate; returns a dict with `mean`, `std_error`, `trials`,
/// `beta`, `seed` and `method`. Runs without holding the GIL.
#[pyfunction]
#[pyo3(signature = (g, seeds, beta, trials, seed = 0, method = "percolation", jobs = 1))]
#[allow(clippy::too_many_arguments)]
fn estimate_mean(
    py: Python<'_>,
    g: &Graph,
    seeds: Vec<usize>,
    beta: f64,
    trials: usize,
    seed: u64,
    method: &str,
    jobs: usize,
) -> PyResult<Py<PyAny>> {
    let seeds = g.seeds(seeds)?;
    let params = EpidemicParams::new(beta, seed, trials).py()?;
    let method = parse_method(method)?;
    let est = py.detach(|| sim::estimate_mean(&g.inner, &seeds, &params, method, jobs));
    serialize(py, &est)
}

/// Bound report as a dict: `lb`, `ub_degree`, optional `exact` and
/// Monte Carlo `estimate`, and structural diagnostics.
#[pyfunction]
#[pyo3(signature = (g, seeds, beta, exact = false, trials = None, seed = 0, method = "percolation", jobs = 1, radius_cap = 32))]
#[allow(clippy::too_many_arguments)]
fn bounds_report(
    py: Python<'_>,
    g: &Graph,
    seeds: Vec<usize>,
    beta: f64,
    exact: bool,
    trials: Option<usize>,
    seed: u64,
    method: &str,
    jobs: usize,
    radius_cap: usize,
) -> PyResult<Py<PyAny>> {
    let seeds = g.seeds(seeds)?;
    let method = parse_method(method)?;
    let options = ReportOptions {
        exact,
        monte_carlo: trials.map(|trials| MonteCarloOptions {
            trials,
            master_seed: seed,
            method,
            jobs,
        }),
        radius_cap,
    };
    let report = py
        .detach(|| bounds::make_report(&g.inner, &seeds, beta, &options))
        .py()?;
    serialize(py, &report)
}

#[pyfunction]
fn cf_rary_tree_mu(r: usize, m: usize, beta: f64) -> PyResult<f64> {
    bounds::cf_rary_tree_mu(r, m, beta).py()
}

#[pyfunction]
fn cf_rooted_reg_tree_limit(r: usize, beta: f64) -> PyResult<f64> {
    bounds::cf_rooted_reg_tree_limit(r, beta).py()
}

#[pyfunction]
fn cf_reg_tree_root(r: usize, beta: f64) -> PyResult<f64> {
    bounds::cf_reg_tree_root(r, beta).py()
}

#[pyfunction]
fn cf_cycle_lb(n: usize, beta: f64) -> PyResult<f64> {
    bounds::cf_cycle_lb(n, beta).py()
}

#[pyfunction]
fn cf_cube_lb(d: usize, beta: f64) -> PyResult<f64> {
    bounds::cf_cube_lb(d, beta).py()
}

#[pyfunction]
fn cf_gw_mean(c: f64, beta: f64) -> PyResult<f64> {
    bounds::cf_gw_mean(c, beta).py()
}

#[pyfunction]
fn cf_kn_lower(n: usize, beta: f64) -> PyResult<f64> {
    bounds::cf_kn_lower(n, beta).py()
}

#[pymodule]
fn pyepibound(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("CapExceededError", m.py().get_type::<CapExceededError>())?;
    m.add_class::<Graph>()?;
    m.add_function(wrap_pyfunction!(cycle, m)?)?;
    m.add_function(wrap_pyfunction!(path, m)?)?;
    m.add_function(wrap_pyfunction!(complete, m)?)?;
    m.add_function(wrap_pyfunction!(hypercube, m)?)?;
    m.add_function(wrap_pyfunction!(rary_tree, m)?)?;
    m.add_function(wrap_pyfunction!(generalized_cycle, m)?)?;
    m.add_function(wrap_pyfunction!(random_regular, m)?)?;
    m.add_function(wrap_pyfunction!(gw_tree, m)?)?;
    m.add_function(wrap_pyfunction!(bfs_distances, m)?)?;
    m.add_function(wrap_pyfunction!(tree_like_radius, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(upper_bound_degree, m)?)?;
    m.add_function(wrap_pyfunction!(exact_mean, m)?)?;
    m.add_function(wrap_pyfunction!(exact_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(exact_mean_tree, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_mean, m)?)?;
    m.add_function(wrap_pyfunction!(bounds_report, m)?)?;
    m.add_function(wrap_pyfunction!(cf_rary_tree_mu, m)?)?;
    m.add_function(wrap_pyfunction!(cf_rooted_reg_tree_limit, m)?)?;
    m.add_function(wrap_pyfunction!(cf_reg_tree_root, m)?)?;
    m.add_function(wrap_pyfunction!(cf_cycle_lb, m)?)?;
    m.add_function(wrap_pyfunction!(cf_cube_lb, m)?)?;
    m.add_function(wrap_pyfunction!(cf_gw_mean, m)?)?;
    m.add_function(wrap_pyfunction!(cf_kn_lower, m)?)?;
    Ok(())
}
