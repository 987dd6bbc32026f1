//! Python module `ssep`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ssep_core::dual::{self, TreeOutcome};
use ssep_core::forward::{self, InitialProfile};
use ssep_core::gw::{self, ProbMode};
use ssep_core::harness::{run_experiment as run_core, ExperimentConfig, ExperimentKind};
use ssep_core::marks::MarkStream;
use ssep_core::model::{self, Configuration, ModelParams, Reservoir, Side};
use ssep_core::pde::{self, BoundaryMode};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn side(s: &str) -> PyResult<Side> {
    match s {
        "left" => Ok(Side::Left),
        "right" => Ok(Side::Right),
        _ => Err(err(format!("side must be 'left' or 'right', got '{s}'"))),
    }
}

fn mode(s: &str) -> PyResult<ProbMode> {
    match s {
        "finite_n" => Ok(ProbMode::FiniteN),
        "limit" => Ok(ProbMode::Limit),
        _ => Err(err(format!("mode must be 'finite_n' or 'limit', got '{s}'"))),
    }
}

fn profile(json: &str) -> PyResult<InitialProfile> {
    let p: InitialProfile = serde_json::from_str(json).map_err(err)?;
    p.validate().map_err(err)?;
    Ok(p)
}

/// Model parameters; `N`, `theta` and the two reservoirs.
#[pyclass(name = "Params", frozen, from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: ModelParams,
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (n, theta, r, rho_bar, b, c, r_prime, rho_bar_prime, b_prime, c_prime))]
    #[allow(clippy::too_many_arguments)]
    fn new(n: usize, theta: f64, r: f64, rho_bar: f64, b: f64, c: f64, r_prime: f64, rho_bar_prime: f64, b_prime: f64, c_prime: f64) -> PyResult<Self> {
        let inner = ModelParams::new(n, theta, Reservoir::new(r, rho_bar, b, c), Reservoir::new(r_prime, rho_bar_prime, b_prime, c_prime)).map_err(err)?;
        Ok(PyParams { inner })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(PyParams {
            inner: ModelParams::from_json_str(s).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.boundary_densities().alpha
    }

    #[getter]
    fn alpha_prime(&self) -> f64 {
        self.inner.boundary_densities().alpha_prime
    }

    fn h1_holds(&self) -> bool {
        self.inner.h1_holds()
    }

    fn with_n(&self, n: usize) -> PyResult<Self> {
        let inner = self.inner.with_n(n);
        inner.validate().map_err(err)?;
        Ok(PyParams { inner })
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

#[pyfunction]
fn alpha_from_params(r: f64, b: f64, rho_bar: f64) -> PyResult<f64> {
    model::alpha_from_params(r, b, rho_bar).map_err(err)
}

/// `(p_plus, p_minus, p_branch)` for `side` in `mode`.
#[pyfunction]
#[pyo3(signature = (params, side_name, mode_name = "finite_n"))]
fn outcome_probs(params: &PyParams, side_name: &str, mode_name: &str) -> PyResult<(f64, f64, f64)> {
    let p = gw::outcome_probs(&params.inner, side(side_name)?, mode(mode_name)?);
    Ok((p.p_plus, p.p_minus, p.p_branch))
}

/// `(alpha_hat, stderr)` from Galton–Watson trees.
#[pyfunction]
#[pyo3(signature = (params, side_name, n_samples, seed, mode_name = "limit"))]
fn estimate_alpha_gw(py: Python<'_>, params: &PyParams, side_name: &str, n_samples: u64, seed: u64, mode_name: &str) -> PyResult<(f64, f64)> {
    let (s, m, p) = (side(side_name)?, mode(mode_name)?, params.inner);
    let e = py
        .detach(|| gw::estimate_alpha_gw(&p, s, m, n_samples, seed, dual::DEFAULT_MAX_NODES))
        .map_err(err)?;
    Ok((e.alpha_hat, e.stderr))
}

/// Configuration at `t_end` from one Gillespie run; index `x - 1` is site `x`.
#[pyfunction]
fn run_gillespie(py: Python<'_>, eta0: Vec<bool>, params: &PyParams, t_end: f64, seed: u64) -> PyResult<Vec<bool>> {
    if eta0.len() + 1 != params.inner.n {
        return Err(err(format!("eta0 must have N - 1 = {} entries", params.inner.n - 1)));
    }
    let p = params.inner;
    let eta = Configuration::from_bits(&eta0);
    Ok(py.detach(|| forward::run_gillespie(&eta, &p, t_end, seed)).iter().collect())
}

/// Empirical density `(values, stderr)` at time `t`; `profile_json` is e.g.
/// `{"kind": "constant", "value": 0.8}`.
#[pyfunction]
fn estimate_density(py: Python<'_>, params: &PyParams, profile_json: &str, t: f64, n_samples: usize, seed: u64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let f0 = profile(profile_json)?;
    let p = params.inner;
    let d = py.detach(|| forward::estimate_density(&f0, &p, t, n_samples, seed)).map_err(err)?;
    Ok((d.values, d.stderr))
}

/// `η_t(x)` from a generated mark stream, resolved backward.
#[pyfunction]
fn resolve_site(x: usize, t: f64, eta0: Vec<bool>, params: &PyParams, stream_seed: u64) -> PyResult<bool> {
    let stream = MarkStream::generate(&params.inner, t, stream_seed);
    let eta = Configuration::from_bits(&eta0);
    dual::resolve_site(x, t, &eta, &stream).map_err(err)
}

/// `(outcome, canonical_tree, value)`; outcome is "tree", "failed" or
/// "overflow" and the other two are `None` unless a tree was built.
#[pyfunction]
fn determination_tree(x: usize, t: f64, eta0: Vec<bool>, params: &PyParams, stream_seed: u64) -> PyResult<(String, Option<String>, Option<bool>)> {
    let stream = MarkStream::generate(&params.inner, t, stream_seed);
    let eta = Configuration::from_bits(&eta0);
    let run = dual::determination_tree(x, t, &eta, &stream, dual::DEFAULT_MAX_NODES).map_err(err)?;
    Ok(match run.outcome {
        TreeOutcome::Tree(tree) => {
            let v = tree.solve().map_err(err)?.is_plus();
            ("tree".into(), Some(tree.canonical()), Some(v))
        }
        TreeOutcome::Failed => ("failed".into(), None, None),
        TreeOutcome::Overflow => ("overflow".into(), None, None),
    })
}

#[pyfunction]
#[pyo3(signature = (profile_json, alpha, alpha_prime, t, u_grid, n_modes = 200))]
fn heat_solution(profile_json: &str, alpha: f64, alpha_prime: f64, t: f64, u_grid: Vec<f64>, n_modes: usize) -> PyResult<Vec<f64>> {
    let f0 = profile(profile_json)?;
    Ok(pde::heat_solution(&f0, alpha, alpha_prime, t, &u_grid, n_modes).map_err(err)?.values)
}

#[pyfunction]
fn stationary_profile(alpha: f64, alpha_prime: f64, u_grid: Vec<f64>) -> Vec<f64> {
    pde::stationary_profile(alpha, alpha_prime, &u_grid)
}

/// Profiles on sites `3..=N-3`, one list per entry of `times`.
#[pyfunction]
fn solve_discrete_density(params: &PyParams, profile_json: &str, times: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    let f0 = profile(profile_json)?;
    let b = BoundaryMode::from_params(&params.inner);
    Ok(pde::solve_discrete_density(&params.inner, &f0, b, &times, None).map_err(err)?.profiles)
}

/// Run a harness experiment from a JSON config; returns the summary JSON
/// and writes the run directory when `out` is given.
#[pyfunction]
#[pyo3(signature = (kind, config_json, out = None))]
fn run_experiment(py: Python<'_>, kind: &str, config_json: &str, out: Option<String>) -> PyResult<String> {
    let k: ExperimentKind = kind.parse().map_err(err)?;
    let cfg = ExperimentConfig::from_json_str(config_json).map_err(err)?;
    let res = py.detach(|| run_core(k, &cfg)).map_err(err)?;
    if let Some(dir) = out {
        res.write(dir).map_err(err)?;
    }
    serde_json::to_string(&res.report).map_err(err)
}

#[pymodule]
fn ssep(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_function(wrap_pyfunction!(alpha_from_params, m)?)?;
    m.add_function(wrap_pyfunction!(outcome_probs, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_alpha_gw, m)?)?;
    m.add_function(wrap_pyfunction!(run_gillespie, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_density, m)?)?;
    m.add_function(wrap_pyfunction!(resolve_site, m)?)?;
    m.add_function(wrap_pyfunction!(determination_tree, m)?)?;
    m.add_function(wrap_pyfunction!(heat_solution, m)?)?;
    m.add_function(wrap_pyfunction!(stationary_profile, m)?)?;
    m.add_function(wrap_pyfunction!(solve_discrete_density, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
