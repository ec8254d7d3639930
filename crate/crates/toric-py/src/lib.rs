//! Python bindings: supports are nested lists of integer exponent vectors,
//! coefficients nested lists of `complex`.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

use toric::condition::{self, ALPHA_STAR};
use toric::polytope::InvariantReport;
use toric::solver::{self, SolveConfig};
use toric::{Error, ExpSumSystem, SupportTuple, C64};

type Supports = Vec<Vec<Vec<i64>>>;

fn err(e: Error) -> PyErr {
    if e.is_numerical() {
        PyRuntimeError::new_err(format!("{}: {e}", e.kind()))
    } else {
        PyValueError::new_err(format!("{}: {e}", e.kind()))
    }
}

fn to_py(py: Python<'_>, v: &Value) -> PyResult<PyObject> {
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_py(py),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_py(py),
            None => n.as_f64().unwrap_or(f64::NAN).into_py(py),
        },
        Value::String(s) => s.into_py(py),
        Value::Array(a) => PyList::new_bound(py, a.iter().map(|x| to_py(py, x)).collect::<PyResult<Vec<_>>>()?).into_py(py),
        Value::Object(m) => {
            let d = PyDict::new_bound(py);
            for (k, x) in m {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_py(py)
        }
    })
}

fn serialize<T: serde::Serialize>(py: Python<'_>, x: &T) -> PyResult<PyObject> {
    to_py(py, &serde_json::to_value(x).map_err(|e| PyRuntimeError::new_err(e.to_string()))?)
}

fn support_tuple(supports: Supports, weights: Option<Vec<Vec<f64>>>) -> PyResult<Arc<SupportTuple>> {
    Ok(Arc::new(SupportTuple::new(supports, weights).map_err(err)?))
}

fn system(supports: Supports, coefficients: Vec<Vec<C64>>, weights: Option<Vec<Vec<f64>>>) -> PyResult<ExpSumSystem> {
    ExpSumSystem::new(support_tuple(supports, weights)?, coefficients).map_err(err)
}

fn certificate_dict(py: Python<'_>, z: &[C64], c: &condition::Certificate) -> PyResult<PyObject> {
    let d = PyDict::new_bound(py);
    d.set_item("point", z.to_vec())?;
    d.set_item("beta", c.beta)?;
    d.set_item("mu", c.mu)?;
    d.set_item("nu", c.nu)?;
    d.set_item("alpha_hat", c.alpha_hat)?;
    d.set_item("passed", c.passed)?;
    Ok(d.into_py(py))
}

/// Lattice, mixed-volume and facet-gap invariants of the supports.
#[pyfunction]
#[pyo3(signature = (supports, weights=None))]
fn invariants(py: Python<'_>, supports: Supports, weights: Option<Vec<Vec<f64>>>) -> PyResult<PyObject> {
    let st = support_tuple(supports, weights)?;
    serialize(py, &InvariantReport::compute(&st).map_err(err)?)
}

#[pyfunction]
fn bkk_count(supports: Supports) -> PyResult<i64> {
    toric::polytope::bkk_count(&supports).map_err(err)
}

/// Certified roots; each is a dict with the point and its certificate.
#[pyfunction]
#[pyo3(signature = (supports, coefficients, seed=0, threads=1, weights=None))]
fn solve(
    py: Python<'_>,
    supports: Supports,
    coefficients: Vec<Vec<C64>>,
    seed: u64,
    threads: usize,
    weights: Option<Vec<Vec<f64>>>,
) -> PyResult<Vec<PyObject>> {
    let f = system(supports, coefficients, weights)?;
    let cfg = SolveConfig { seed, threads, ..Default::default() };
    let out = py.allow_threads(|| solver::solve(&f, &cfg)).map_err(err)?;
    out.solution.roots.iter().map(|r| certificate_dict(py, &r.point, &r.certificate)).collect()
}

/// The test `½βμν ≤ alpha` at `point`.
#[pyfunction]
#[pyo3(signature = (supports, coefficients, point, alpha=ALPHA_STAR, weights=None))]
fn certify(
    py: Python<'_>,
    supports: Supports,
    coefficients: Vec<Vec<C64>>,
    point: Vec<C64>,
    alpha: f64,
    weights: Option<Vec<Vec<f64>>>,
) -> PyResult<PyObject> {
    let f = system(supports, coefficients, weights)?.normalized().map_err(err)?;
    if point.len() != f.n() {
        return Err(PyValueError::new_err("point has the wrong dimension"));
    }
    certificate_dict(py, &point, &condition::certify(&f, &point, alpha))
}

/// Brute-force roots for one or two variables.
#[pyfunction]
#[pyo3(signature = (supports, coefficients, weights=None))]
fn oracle(supports: Supports, coefficients: Vec<Vec<C64>>, weights: Option<Vec<Vec<f64>>>) -> PyResult<Vec<Vec<C64>>> {
    let f = system(supports, coefficients, weights)?;
    Ok(toric::oracle::oracle_roots(&f).map_err(err)?.roots)
}

/// Gaussian coefficients with `E|c|² = 1` on the given supports.
#[pyfunction]
#[pyo3(signature = (supports, seed=0))]
fn sample(supports: Supports, seed: u64) -> PyResult<Vec<Vec<C64>>> {
    let st = support_tuple(supports, None)?;
    Ok(solver::sample_gaussian_seeded(&st, seed).coeffs)
}

#[pymodule]
fn toric_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(invariants, m)?)?;
    m.add_function(wrap_pyfunction!(bkk_count, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add("ALPHA_STAR", ALPHA_STAR)?;
    Ok(())
}
