//! Python view of the core types: distributions, random path/cycle clusterings,
//! the expected join matrix, both random-clustering testers and the config runner.

use cc_core::analysis::{expected_join_matrix, min_eigenvalue};
use cc_core::domain::{emd_exact, tv_distance, DiscreteDistribution, Domain, MetricKind, MetricSpace};
use cc_core::experiment::{run_experiment, Calibration, ExperimentConfig};
use cc_core::oracle::{draw_random_clustering, GraphKind, GridDensity, RandomClusterDraw};
use cc_core::random::{Alg1Config, SingletonTesterConfig};
use cc_core::CoreError;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: CoreError) -> PyErr {
    match e {
        CoreError::Io(_) | CoreError::CalibrationMissing(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn kind(s: &str) -> PyResult<GraphKind> {
    s.parse().map_err(err)
}

#[pyclass(name = "Distribution", module = "cc_py", from_py_object)]
#[derive(Clone)]
struct PyDistribution {
    inner: DiscreteDistribution,
}

#[pymethods]
impl PyDistribution {
    /// Normalizes nonnegative weights.
    #[new]
    fn new(weights: Vec<f64>) -> PyResult<Self> {
        Ok(PyDistribution { inner: DiscreteDistribution::from_unnormalized(weights).map_err(err)? })
    }

    #[staticmethod]
    fn uniform(k: usize) -> PyResult<Self> {
        if k == 0 {
            return Err(PyValueError::new_err("k must be positive"));
        }
        Ok(PyDistribution { inner: DiscreteDistribution::uniform(k) })
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn tv(&self, other: &PyDistribution) -> PyResult<f64> {
        tv_distance(&self.inner, &other.inner).map_err(err)
    }

    /// Exact EMD on `[n]^d` under ℓp.
    #[pyo3(signature = (other, n, d=1, p=1.0))]
    fn emd(&self, other: &PyDistribution, n: u32, d: usize, p: f64) -> PyResult<f64> {
        let m = MetricSpace::new(Domain::grid(n, d).map_err(err)?, MetricKind::Lp { p }).map_err(err)?;
        Ok(emd_exact(&self.inner, &other.inner, &m).map_err(err)?.0)
    }

    fn sample(&self, count: usize, seed: u64) -> Vec<usize> {
        let mut rng = cc_core::rng_from_seed(seed);
        let s = self.inner.sampler();
        (0..count).map(|_| s.sample(&mut rng)).collect()
    }

    fn __repr__(&self) -> String {
        format!("Distribution(len={})", self.inner.len())
    }
}

#[pyclass(name = "RandomClustering", module = "cc_py", skip_from_py_object)]
struct PyRandomClustering {
    inner: RandomClusterDraw,
}

#[pymethods]
impl PyRandomClustering {
    /// Deletes every edge of the path or cycle on `[n]` with probability `rho`.
    #[new]
    fn new(kind_name: &str, n: u32, rho: f64, seed: u64) -> PyResult<Self> {
        Ok(PyRandomClustering { inner: draw_random_clustering(kind(kind_name)?, n, rho, seed).map_err(err)? })
    }

    /// Cell index of every element.
    #[getter]
    fn labels(&self) -> Vec<u32> {
        self.inner.clustering().gamma().to_vec()
    }

    #[getter]
    fn kept(&self) -> Vec<bool> {
        self.inner.kept().to_vec()
    }

    fn num_cells(&self) -> usize {
        use cc_core::oracle::Partition;
        self.inner.clustering().num_cells()
    }
}

/// Entry `(i, j)` of `E[1{γ(i)=γ(j)}]`, or the full matrix when `i` and `j` are omitted.
#[pyfunction]
#[pyo3(signature = (kind_name, n, rho, i=None, j=None))]
fn phi(py: Python<'_>, kind_name: &str, n: usize, rho: f64, i: Option<usize>, j: Option<usize>) -> PyResult<Py<PyAny>> {
    let m = expected_join_matrix(kind(kind_name)?, n, rho).map_err(err)?;
    match (i, j) {
        (Some(i), Some(j)) if i < n && j < n => Ok(m.entry(i, j).into_pyobject(py)?.into_any().unbind()),
        (Some(_), Some(_)) => Err(PyValueError::new_err("index out of range")),
        _ => {
            let rows: Vec<Vec<f64>> = (0..n).map(|a| (0..n).map(|b| m.entry(a, b)).collect()).collect();
            Ok(rows.into_pyobject(py)?.into_any().unbind())
        }
    }
}

#[pyfunction]
fn lambda_min(kind_name: &str, n: usize, rho: f64) -> PyResult<f64> {
    min_eigenvalue(&expected_join_matrix(kind(kind_name)?, n, rho).map_err(err)?).map_err(err)
}

fn line_input(n: u32, weights: Option<Vec<f64>>) -> PyResult<GridDensity> {
    let dist = match weights {
        Some(w) => DiscreteDistribution::from_unnormalized(w).map_err(err)?,
        None => DiscreteDistribution::uniform(n as usize),
    };
    GridDensity::new(Domain::line(n).map_err(err)?, dist).map_err(err)
}

/// One zero-query run on a fresh clustering; returns a dict of the outcome.
#[pyfunction]
#[pyo3(signature = (kind_name, n, eps, rho, c, l, seed, weights=None))]
fn zero_query_test<'py>(
    py: Python<'py>,
    kind_name: &str,
    n: u32,
    eps: f64,
    rho: f64,
    c: f64,
    l: f64,
    seed: u64,
    weights: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyDict>> {
    let mu = line_input(n, weights)?;
    let cfg = Alg1Config::new(kind(kind_name)?, n, eps, rho, c, l);
    let o = py.detach(|| cc_core::experiment::runner::alg1_trial(&cfg, &mu, seed)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("accept", o.accept)?;
    d.set_item("y", o.y)?;
    d.set_item("threshold", o.threshold)?;
    d.set_item("samples", o.samples)?;
    Ok(d)
}

/// One run of the query-based singleton tester.
#[pyfunction]
#[pyo3(signature = (kind_name, n, eps, rho, c_io, l, seed, weights=None))]
fn singleton_test<'py>(
    py: Python<'py>,
    kind_name: &str,
    n: u32,
    eps: f64,
    rho: f64,
    c_io: f64,
    l: f64,
    seed: u64,
    weights: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyDict>> {
    let mu = line_input(n, weights)?;
    let mut cfg = SingletonTesterConfig::new(kind(kind_name)?, n, eps, rho, c_io);
    cfg.l = l;
    let o = py.detach(|| cc_core::experiment::runner::singleton_trial(&cfg, &mu, seed)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("accept", o.accept)?;
    d.set_item("cells", o.cells)?;
    d.set_item("singletons", o.singletons)?;
    d.set_item("samples", o.samples)?;
    d.set_item("labels", o.labels)?;
    Ok(d)
}

/// Runs a TOML experiment config and returns one dict per trial.
#[pyfunction]
#[pyo3(signature = (config_toml, calibration_toml=None, jobs=1))]
fn run_config<'py>(
    py: Python<'py>,
    config_toml: &str,
    calibration_toml: Option<&str>,
    jobs: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = ExperimentConfig::from_toml(config_toml).map_err(err)?;
    let cal = calibration_toml.map(Calibration::from_toml).transpose().map_err(err)?;
    let recs = py.detach(|| run_experiment(&cfg, cal.as_ref(), jobs)).map_err(err)?;
    recs.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("trial", r.trial)?;
            d.set_item("seed", r.seed)?;
            d.set_item("verdict", &r.verdict)?;
            d.set_item("stat", r.stat)?;
            d.set_item("tv", r.tv)?;
            d.set_item("emd", r.emd)?;
            d.set_item("samples", r.samples)?;
            d.set_item("labels", r.labels)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn cc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyDistribution>()?;
    m.add_class::<PyRandomClustering>()?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_min, m)?)?;
    m.add_function(wrap_pyfunction!(zero_query_test, m)?)?;
    m.add_function(wrap_pyfunction!(singleton_test, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
